#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dagrid/accumulate.hpp"

namespace dagrid {

/// Polar accumulator geometry. Rows of the polar grid are radial bins of
/// s_r pixels; columns are angular bins of s_theta radians.
struct PolarConfig {
    double s_r = 1.0;
    double s_theta = 0.0;
    std::size_t h_r = 64;
    std::size_t w_psi = 64;
    double center_x = 0.0;  // row coordinate of the pole
    double center_y = 0.0;  // column coordinate of the pole
    bool angular_wrap = true;

    /// Defaults for an H x W image: pole at ((H-1)/2, (W-1)/2),
    /// s_theta = 2 pi / w_psi, and s_r chosen so the last radial bin sits on
    /// the inscribed circle, or on the corners when cover_corners is set.
    static PolarConfig for_image(std::size_t height, std::size_t width, std::size_t h_r = 64,
                                 std::size_t w_psi = 64, bool cover_corners = false);

    Wrap wrap() const noexcept { return angular_wrap ? Wrap::Columns : Wrap::None; }
    TargetShape shape() const noexcept { return {h_r, w_psi}; }
    void validate() const;
};

/// Grid sizes accepted as presets for square polar grids.
inline constexpr std::size_t kPolarPresets[] = {32, 64, 128, 224};

/// Polar coordinates of every pixel of an H x W image:
///   gx = radius / s_r,  gy = (atan2(j - y_c, i - x_c) + pi) / s_theta.
SamplingGrid polar_grid(std::size_t height, std::size_t width, const PolarConfig& cfg);

/// Image coordinates of every polar cell; the inverse map used for polar sampling.
SamplingGrid polar_inverse_grid(const PolarConfig& cfg);

/// Unnormalized polar accumulation (values and homogeneous weights).
AccumulatorGrid polar_accumulate_raw(const Tensor& u, const PolarConfig& cfg, KernelKind kind);

/// Polar accumulation normalized by the homogeneous weights.
AccumulatorGrid polar_accumulate(const Tensor& u, const PolarConfig& cfg, KernelKind kind,
                                 double epsilon = kDefaultEpsilon);

/// Classical grid sampling of u onto the h_r x w_psi polar grid.
Tensor polar_sample(const Tensor& u, const PolarConfig& cfg, KernelKind kind);

/// Reads a C x h_r x w_psi polar tensor back into an image of the given shape.
Tensor polar_slice(const Tensor& p, const PolarConfig& cfg, KernelKind kind, Shape2 image_shape);

/// True for pixels whose radial coordinate lies inside the polar grid.
std::vector<bool> polar_coverage(std::size_t height, std::size_t width, const PolarConfig& cfg);

/// Per-pixel 2x2 combination weights that replace the bilinear weights when
/// slicing from the polar grid. Shape H x W x 2 x 2.
class ParametricSlicer {
public:
    ParametricSlicer() = default;
    ParametricSlicer(std::size_t height, std::size_t width, double fill = 0.0);

    /// Weights equal to the bilinear kernel at each pixel's polar coordinates,
    /// so slicing starts out identical to bilinear polar slicing.
    static ParametricSlicer bilinear(std::size_t height, std::size_t width, const PolarConfig& cfg);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }

    double& at(std::size_t i, std::size_t j, std::size_t a, std::size_t b) noexcept {
        return l_[((i * width_ + j) * 2 + a) * 2 + b];
    }
    double at(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const noexcept {
        return l_[((i * width_ + j) * 2 + a) * 2 + b];
    }
    std::vector<double>& values() noexcept { return l_; }
    const std::vector<double>& values() const noexcept { return l_; }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> l_;
};

/// U[c][i][j] = sum_{a,b in {0,1}} P[c][p+a][q+b] * L[i][j][a][b], with
/// p = floor(gx), q = floor(gy). Radial cells outside the grid contribute
/// zero; angular cells wrap when the config wraps.
Tensor parametric_slice(const Tensor& p, const ParametricSlicer& slicer, const PolarConfig& cfg);

struct ParametricSliceGrad {
    Tensor d_p;
    ParametricSlicer d_l;
};

ParametricSliceGrad parametric_slice_backward(const Tensor& d_u, const Tensor& p, const ParametricSlicer& slicer,
                                              const PolarConfig& cfg);

/// Grid-processing function applied between polar accumulation and slicing.
struct FilterSpec {
    enum class Kind { None, Box, Gaussian };
    Kind kind = Kind::None;
    double param = 0.0;  // box radius or Gaussian sigma

    /// Parses "none", "box:<radius>" or "gaussian:<sigma>".
    static FilterSpec parse(std::string_view text);
    std::string to_string() const;
    Tensor apply(const Tensor& t) const;
};

/// Accumulate into the polar grid, normalize, filter, and slice back.
Tensor polar_roundtrip_filter(const Tensor& u, const PolarConfig& cfg, KernelKind kind, const FilterSpec& filter,
                              double epsilon = kDefaultEpsilon);

}  // namespace dagrid
