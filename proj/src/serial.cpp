#include "dagrid/serial.hpp"

namespace dagrid::serial {

Tensor accumulate(const Tensor& u, const GridSet& grids, KernelKind kind, TargetShape shape, Wrap wrap) {
    if (shape.height == 0 || shape.width == 0) throw InvalidArgument("target shape must be at least 1x1");
    validate_grid_set(grids, u.height(), u.width());
    Tensor out(u.channels(), shape.height, shape.width);
    for (const auto& grid : grids) {
        for (std::size_t n = 0; n < u.height(); ++n) {
            for (std::size_t m = 0; m < u.width(); ++m) {
                for (const Tap& t : taps(kind, grid.gx(0, n, m), grid.gy(0, n, m), shape.height, shape.width, wrap)) {
                    for (std::size_t c = 0; c < u.channels(); ++c) out(c, t.row, t.col) += u(c, n, m) * t.weight;
                }
            }
        }
    }
    return out;
}

Tensor slice(const Tensor& v, const GridSet& grids, KernelKind kind, Shape2 source_shape, Wrap wrap) {
    validate_grid_set(grids, source_shape.height, source_shape.width);
    Tensor out(v.channels(), source_shape.height, source_shape.width);
    for (std::size_t i = 0; i < source_shape.height; ++i) {
        for (std::size_t j = 0; j < source_shape.width; ++j) {
            for (const auto& grid : grids) {
                for (const Tap& t : taps(kind, grid.gx(0, i, j), grid.gy(0, i, j), v.height(), v.width(), wrap)) {
                    for (std::size_t c = 0; c < v.channels(); ++c) out(c, i, j) += v(c, t.row, t.col) * t.weight;
                }
            }
        }
    }
    return out;
}

}  // namespace dagrid::serial
