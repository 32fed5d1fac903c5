#include "dagrid/accumulate.hpp"

#include <cmath>
#include <string>

#include "dagrid/parallel.hpp"

namespace dagrid {

SamplingGrid SamplingGrid::identity(std::size_t height, std::size_t width) {
    auto mesh = mesh_grids(height, width);
    return SamplingGrid{std::move(mesh.mx), std::move(mesh.my)};
}

void SamplingGrid::validate() const {
    if (gx.channels() != 1 || gy.channels() != 1) throw InvalidArgument("sampling grid planes must be single-channel");
    if (!gx.same_shape(gy)) {
        throw InvalidArgument("sampling grid gx " + gx.shape_string() + " and gy " + gy.shape_string() +
                              " differ in shape");
    }
    if (!gx.all_finite() || !gy.all_finite()) throw InvalidArgument("sampling grid contains non-finite values");
}

void validate_grid_set(const GridSet& grids, std::size_t height, std::size_t width) {
    if (grids.empty()) throw InvalidArgument("grid set must contain at least one grid");
    for (std::size_t k = 0; k < grids.size(); ++k) {
        grids[k].validate();
        if (grids[k].height() != height || grids[k].width() != width) {
            throw InvalidArgument("grid " + std::to_string(k) + " has shape " + grids[k].gx.shape_string() +
                                  ", expected 1x" + std::to_string(height) + "x" + std::to_string(width));
        }
    }
}

namespace {

void check_target(TargetShape shape) {
    if (shape.height == 0 || shape.width == 0) throw InvalidArgument("target shape must be at least 1x1");
}

// Splats source rows [row_begin, row_end) of the flattened (grid, row) index
// space into out.
void splat_rows(const Tensor& u, const GridSet& grids, KernelKind kind, Wrap wrap, std::size_t row_begin,
                std::size_t row_end, Tensor& out) {
    const std::size_t h = u.height();
    const std::size_t w = u.width();
    const std::size_t th = out.height();
    const std::size_t tw = out.width();
    for (std::size_t row = row_begin; row < row_end; ++row) {
        const std::size_t k = row / h;
        const std::size_t n = row % h;
        const auto& grid = grids[k];
        for (std::size_t m = 0; m < w; ++m) {
            const TapSet ts = taps(kind, grid.gx(0, n, m), grid.gy(0, n, m), th, tw, wrap);
            for (const Tap& t : ts) {
                for (std::size_t c = 0; c < u.channels(); ++c) out(c, t.row, t.col) += u(c, n, m) * t.weight;
            }
        }
    }
}

}  // namespace

Tensor accumulate(const Tensor& u, const GridSet& grids, KernelKind kind, TargetShape shape, Wrap wrap) {
    check_target(shape);
    validate_grid_set(grids, u.height(), u.width());

    const std::size_t rows = grids.size() * u.height();
    const std::size_t parts = scatter_partitions(rows);
    if (parts == 1) {
        Tensor out(u.channels(), shape.height, shape.width);
        splat_rows(u, grids, kind, wrap, 0, rows, out);
        return out;
    }

    // Each fixed partition owns a private buffer; buffers are merged in
    // partition order, so the result is the same for any worker count.
    std::vector<Tensor> partial(parts);
    const auto nparts = static_cast<std::ptrdiff_t>(parts);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t p = 0; p < nparts; ++p) {
        const auto up = static_cast<std::size_t>(p);
        partial[up] = Tensor(u.channels(), shape.height, shape.width);
        splat_rows(u, grids, kind, wrap, up * rows / parts, (up + 1) * rows / parts, partial[up]);
    }

    Tensor out = std::move(partial[0]);
    const auto total = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const auto ui = static_cast<std::size_t>(idx);
        double acc = out[ui];
        for (std::size_t p = 1; p < parts; ++p) acc += partial[p][ui];
        out[ui] = acc;
    }
    return out;
}

Tensor accumulate_weights(const GridSet& grids, KernelKind kind, Shape2 source_shape, TargetShape shape, Wrap wrap) {
    return accumulate(Tensor(1, source_shape.height, source_shape.width, 1.0), grids, kind, shape, wrap);
}

AccumulatorGrid accumulate_homogeneous(const Tensor& u, const GridSet& grids, KernelKind kind, TargetShape shape,
                                       Wrap wrap) {
    AccumulatorGrid acc;
    acc.values = accumulate(u, grids, kind, shape, wrap);
    acc.weights = accumulate_weights(grids, kind, {u.height(), u.width()}, shape, wrap);
    return acc;
}

AccumulatorGrid normalize(AccumulatorGrid acc, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("normalize: epsilon must be > 0");
    if (acc.normalized) throw InvalidArgument("normalize: accumulator grid is already normalized");
    if (acc.weights.channels() != 1 || !acc.weights.same_spatial_shape(acc.values)) {
        throw InvalidArgument("normalize: weights " + acc.weights.shape_string() + " do not match values " +
                              acc.values.shape_string());
    }
    for (std::size_t c = 0; c < acc.values.channels(); ++c) {
        auto vals = acc.values.plane(c);
        auto wts = acc.weights.plane(0);
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] /= wts[k] + epsilon;
    }
    acc.normalized = true;
    return acc;
}

Tensor slice(const Tensor& v, const GridSet& grids, KernelKind kind, Shape2 source_shape, Wrap wrap) {
    validate_grid_set(grids, source_shape.height, source_shape.width);
    if (v.height() == 0 || v.width() == 0) throw InvalidArgument("slice: empty accumulator grid");

    Tensor out(v.channels(), source_shape.height, source_shape.width);
    const auto h = static_cast<std::ptrdiff_t>(source_shape.height);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < h; ++si) {
        const auto i = static_cast<std::size_t>(si);
        for (std::size_t j = 0; j < source_shape.width; ++j) {
            for (const auto& grid : grids) {
                const TapSet ts = taps(kind, grid.gx(0, i, j), grid.gy(0, i, j), v.height(), v.width(), wrap);
                for (const Tap& t : ts) {
                    for (std::size_t c = 0; c < v.channels(); ++c) out(c, i, j) += v(c, t.row, t.col) * t.weight;
                }
            }
        }
    }
    return out;
}

Tensor grid_sample(const Tensor& u, const SamplingGrid& grid, KernelKind kind, Wrap wrap) {
    return slice(u, GridSet{grid}, kind, {grid.height(), grid.width()}, wrap);
}

Tensor accumulate_backward_input(const Tensor& d_v, const GridSet& grids, KernelKind kind, Shape2 source_shape,
                                 Wrap wrap) {
    return slice(d_v, grids, kind, source_shape, wrap);
}

Tensor slice_backward(const Tensor& d_u, const GridSet& grids, KernelKind kind, TargetShape shape, Wrap wrap) {
    return accumulate(d_u, grids, kind, shape, wrap);
}

namespace {

// For every grid k and source cell (n, m):
//   dgx = sum_c a[c][n][m] * sum_{i,j} b[c][i][j] K'(gx, i) K(gy, j)
//   dgy = sum_c a[c][n][m] * sum_{i,j} b[c][i][j] K(gx, i) K'(gy, j)
// With (a, b) = (u, d_v) this is the accumulation's grid gradient; with
// (a, b) = (d_u, v) it is the slicing's.
GridSet grid_gradient(const Tensor& a, const Tensor& b, const GridSet& grids, Wrap wrap) {
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    const auto th = static_cast<long long>(b.height());
    const auto tw = static_cast<long long>(b.width());
    const bool periodic = wrap == Wrap::Columns;

    GridSet out;
    out.reserve(grids.size());
    for (std::size_t k = 0; k < grids.size(); ++k) out.push_back({Tensor(1, h, w), Tensor(1, h, w)});

    const auto rows = static_cast<std::ptrdiff_t>(grids.size() * h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < rows; ++row) {
        const std::size_t k = static_cast<std::size_t>(row) / h;
        const std::size_t n = static_cast<std::size_t>(row) % h;
        for (std::size_t m = 0; m < w; ++m) {
            const double gx = grids[k].gx(0, n, m);
            const double gy = grids[k].gy(0, n, m);
            if (!(gx > -2.0 && gx < static_cast<double>(th) + 2.0)) continue;
            if (!periodic && !(gy > -2.0 && gy < static_cast<double>(tw) + 2.0)) continue;
            if (periodic && !(std::abs(gy) < 1e15)) continue;

            const AxisTapSet xs = bilinear_axis_taps(gx);
            const AxisTapSet ys = bilinear_axis_taps(gy);
            double dgx = 0.0, dgy = 0.0;
            for (std::size_t c = 0; c < a.channels(); ++c) {
                const double ac = a(c, n, m);
                if (ac == 0.0) continue;
                double sx = 0.0, sy = 0.0;
                for (const AxisTap& xt : xs) {
                    if (xt.index < 0 || xt.index >= th) continue;
                    for (const AxisTap& yt : ys) {
                        long long col = yt.index;
                        if (periodic) {
                            col %= tw;
                            if (col < 0) col += tw;
                        } else if (col < 0 || col >= tw) {
                            continue;
                        }
                        const double bv = b(c, static_cast<std::size_t>(xt.index), static_cast<std::size_t>(col));
                        sx += bv * xt.slope * yt.weight;
                        sy += bv * xt.weight * yt.slope;
                    }
                }
                dgx += ac * sx;
                dgy += ac * sy;
            }
            out[k].gx(0, n, m) = dgx;
            out[k].gy(0, n, m) = dgy;
        }
    }
    return out;
}

void require_bilinear(KernelKind kind, const char* op) {
    if (kind != KernelKind::Bilinear) {
        throw UnsupportedKernel(std::string(op) + ": grid gradients require the bilinear kernel");
    }
}

}  // namespace

GridSet accumulate_backward_grid(const Tensor& d_v, const Tensor& u, const GridSet& grids, KernelKind kind,
                                 Wrap wrap) {
    require_bilinear(kind, "accumulate_backward_grid");
    validate_grid_set(grids, u.height(), u.width());
    if (d_v.channels() != u.channels()) throw InvalidArgument("accumulate_backward_grid: channel mismatch");
    return grid_gradient(u, d_v, grids, wrap);
}

GridSet slice_backward_grid(const Tensor& d_u, const Tensor& v, const GridSet& grids, KernelKind kind, Wrap wrap) {
    require_bilinear(kind, "slice_backward_grid");
    validate_grid_set(grids, d_u.height(), d_u.width());
    if (d_u.channels() != v.channels()) throw InvalidArgument("slice_backward_grid: channel mismatch");
    return grid_gradient(d_u, v, grids, wrap);
}

SamplingGrid grid_sample_backward_grid(const Tensor& d_out, const Tensor& u, const SamplingGrid& grid,
                                       KernelKind kind, Wrap wrap) {
    return std::move(slice_backward_grid(d_out, u, GridSet{grid}, kind, wrap).front());
}

}  // namespace dagrid
