#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace dagrid {

enum class KernelKind { Nearest, Bilinear };

/// Column boundary rule of the target grid. Periodic columns are used by the
/// polar grid, whose angular axis closes on itself.
enum class Wrap { None, Columns };

KernelKind parse_kernel(std::string_view name);
std::string_view to_string(KernelKind kind) noexcept;

/// Weight of sampling coordinate g at integer cell i.
/// Nearest: 1 iff floor(g + 0.5) == i. Bilinear: max(0, 1 - |g - i|).
double kernel_weight(KernelKind kind, double g, long long i) noexcept;

/// d/dg of the bilinear weight; -sign(g - i) on |g - i| <= 1 with sign(0) = 0.
double kernel_weight_derivative(double g, long long i) noexcept;

struct Tap {
    std::size_t row;
    std::size_t col;
    double weight;
};

/// Nonzero kernel products for one coordinate pair, at most four.
class TapSet {
public:
    const Tap* begin() const noexcept { return taps_.data(); }
    const Tap* end() const noexcept { return taps_.data() + count_; }
    std::size_t size() const noexcept { return count_; }
    const Tap& operator[](std::size_t k) const noexcept { return taps_[k]; }

    void push(std::size_t row, std::size_t col, double weight) noexcept {
        taps_[count_++] = Tap{row, col, weight};
    }

private:
    std::array<Tap, 4> taps_{};
    std::size_t count_ = 0;
};

/// Cells of a target_h x target_w grid with positive weight
/// K(gx, i) * K(gy, j). Rows outside the grid are dropped and their weight is
/// lost. Columns are dropped too unless wrap is Columns, in which case they
/// are taken modulo target_w.
TapSet taps(KernelKind kind, double gx, double gy, std::size_t target_h, std::size_t target_w,
            Wrap wrap = Wrap::None) noexcept;

/// Up to three integer cells i with |g - i| <= 1 together with the bilinear
/// weight and its derivative at each. Used by the grid-gradient kernels, which
/// need the support edge where the weight is zero but the slope is not.
struct AxisTap {
    long long index;
    double weight;
    double slope;
};

class AxisTapSet {
public:
    const AxisTap* begin() const noexcept { return taps_.data(); }
    const AxisTap* end() const noexcept { return taps_.data() + count_; }
    std::size_t size() const noexcept { return count_; }
    void push(const AxisTap& t) noexcept { taps_[count_++] = t; }

private:
    std::array<AxisTap, 3> taps_{};
    std::size_t count_ = 0;
};

AxisTapSet bilinear_axis_taps(double g) noexcept;

}  // namespace dagrid
