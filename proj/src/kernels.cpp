#include "dagrid/kernels.hpp"

#include <cmath>
#include <string>

#include "dagrid/tensor.hpp"

namespace dagrid {

KernelKind parse_kernel(std::string_view name) {
    if (name == "nearest") return KernelKind::Nearest;
    if (name == "bilinear") return KernelKind::Bilinear;
    throw InvalidArgument("unknown kernel '" + std::string(name) + "' (expected nearest|bilinear)");
}

std::string_view to_string(KernelKind kind) noexcept {
    return kind == KernelKind::Nearest ? "nearest" : "bilinear";
}

double kernel_weight(KernelKind kind, double g, long long i) noexcept {
    if (kind == KernelKind::Nearest) {
        return std::floor(g + 0.5) == static_cast<double>(i) ? 1.0 : 0.0;
    }
    return std::max(0.0, 1.0 - std::abs(g - static_cast<double>(i)));
}

double kernel_weight_derivative(double g, long long i) noexcept {
    const double d = g - static_cast<double>(i);
    if (std::abs(d) > 1.0) return 0.0;
    return d > 0.0 ? -1.0 : (d < 0.0 ? 1.0 : 0.0);
}

namespace {

// Resolves a candidate row/column index against an extent. Returns false if
// the cell is dropped.
inline bool resolve(long long idx, std::size_t extent, bool periodic, std::size_t& out) noexcept {
    const auto n = static_cast<long long>(extent);
    if (periodic) {
        idx %= n;
        if (idx < 0) idx += n;
    } else if (idx < 0 || idx >= n) {
        return false;
    }
    out = static_cast<std::size_t>(idx);
    return true;
}

// Coordinates this far outside a grid can never touch it; also keeps the
// floor() result inside the range of long long.
inline bool far_outside(double g, std::size_t extent) noexcept {
    return !(g > -1.0 && g < static_cast<double>(extent) + 1.0);
}

}  // namespace

TapSet taps(KernelKind kind, double gx, double gy, std::size_t target_h, std::size_t target_w,
            Wrap wrap) noexcept {
    TapSet out;
    const bool periodic = wrap == Wrap::Columns;
    if (far_outside(gx, target_h)) return out;
    if (!periodic && far_outside(gy, target_w)) return out;
    if (periodic && !(std::abs(gy) < 1e15)) return out;

    if (kind == KernelKind::Nearest) {
        std::size_t i = 0, j = 0;
        if (resolve(static_cast<long long>(std::floor(gx + 0.5)), target_h, false, i) &&
            resolve(static_cast<long long>(std::floor(gy + 0.5)), target_w, periodic, j)) {
            out.push(i, j, 1.0);
        }
        return out;
    }

    const auto i0 = static_cast<long long>(std::floor(gx));
    const auto j0 = static_cast<long long>(std::floor(gy));
    for (long long di = 0; di < 2; ++di) {
        std::size_t i = 0;
        const double wx = kernel_weight(KernelKind::Bilinear, gx, i0 + di);
        if (wx <= 0.0 || !resolve(i0 + di, target_h, false, i)) continue;
        for (long long dj = 0; dj < 2; ++dj) {
            std::size_t j = 0;
            const double wy = kernel_weight(KernelKind::Bilinear, gy, j0 + dj);
            if (wy <= 0.0 || !resolve(j0 + dj, target_w, periodic, j)) continue;
            out.push(i, j, wx * wy);
        }
    }
    return out;
}

AxisTapSet bilinear_axis_taps(double g) noexcept {
    AxisTapSet out;
    if (!std::isfinite(g)) return out;
    const auto lo = static_cast<long long>(std::ceil(g - 1.0));
    const auto hi = static_cast<long long>(std::floor(g + 1.0));
    for (long long i = lo; i <= hi; ++i) {
        out.push(AxisTap{i, kernel_weight(KernelKind::Bilinear, g, i), kernel_weight_derivative(g, i)});
    }
    return out;
}

}  // namespace dagrid
