#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dagrid/accumulate.hpp"

namespace dagrid {

/// Sobel derivatives of a single-channel image with magnitude and unit
/// direction. x runs along rows, y along columns. All planes are 1 x H x W.
struct GradientField {
    Tensor ux;
    Tensor uy;
    Tensor magnitude;
    Tensor unit_x;
    Tensor unit_y;
    double epsilon = kDefaultEpsilon;
};

/// 3x3 Sobel scaled by 1/8 (a unit ramp has unit slope) with replicated
/// borders. unit = gradient / (magnitude + epsilon).
GradientField sobel_gradient_field(const Tensor& u, double epsilon = kDefaultEpsilon);

/// Adjoint of the scaled Sobel pair: maps (d ux, d uy) back onto the image.
Tensor sobel_backward(const Tensor& d_ux, const Tensor& d_uy);

/// Chains gradients on the magnitude and unit planes back onto (ux, uy)
/// through S = |grad| and unit = grad / (S + eps). Cells with
/// S < 10 eps are not differentiable there and receive zero.
std::pair<Tensor, Tensor> gradient_field_backward(const GradientField& field, const Tensor& d_magnitude,
                                                  const Tensor& d_unit_x, const Tensor& d_unit_y);

/// Ray grid for one radius: gx = mx + k unit_x, gy = my + k unit_y.
/// Negative k gives the opposite-direction grid.
SamplingGrid circular_grid(const GradientField& field, double k);

struct CircularGrids {
    GridSet forward;   // k = 1..N along the gradient
    GridSet backward;  // k = 1..N against the gradient
};

CircularGrids circular_grids(const GradientField& field, std::size_t radii_max);

/// A radius band: radii k with lo < k <= hi.
struct RadiusBand {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

struct CircularConfig {
    /// Either a single maximum radius N (band 1..N) or strictly decreasing
    /// band edges such as {15, 10, 5} giving bands (10,15], (5,10], (0,5].
    std::vector<std::size_t> radii{15, 10, 5};
    bool symmetric = true;
    double epsilon = kDefaultEpsilon;
    KernelKind kernel = KernelKind::Bilinear;

    std::vector<RadiusBand> bands() const;
    void validate() const;
};

struct CircularBand {
    Tensor v_s;
    Tensor v_u;
};

/// Signed, unnormalized circular accumulation. v_s accumulates the gradient
/// magnitude and v_u the feature map.
struct CircularAccumulation {
    Tensor v_s;
    Tensor v_u;
    std::vector<CircularBand> per_band;  // one entry per band, in config order
};

/// v = D(x; forward rays) - D(x; backward rays) over all configured radii;
/// the backward term is dropped when cfg.symmetric is false.
CircularAccumulation circular_accumulate(const Tensor& u, const GradientField& field, const CircularConfig& cfg);

/// Accumulation of x along rays with radii lo < k <= hi in one direction:
/// +1 along the gradient, -1 against it. Terms are summed in increasing k.
Tensor ray_accumulate(const Tensor& x, const GradientField& field, RadiusBand band, int direction, KernelKind kind);

struct CircularGrad {
    Tensor d_magnitude;  // holding the rays fixed
    Tensor d_u;          // holding the rays fixed
    Tensor d_unit_x;     // through the ray grids (bilinear only)
    Tensor d_unit_y;
};

/// Backward pass of circular_accumulate given upstream gradients on v_s and v_u.
CircularGrad circular_backward(const Tensor& d_vs, const Tensor& d_vu, const Tensor& u, const GradientField& field,
                               const CircularConfig& cfg);

struct CircleDetection {
    std::size_t row = 0;
    std::size_t col = 0;
    double score = 0.0;
};

/// Peak of v_s after a 3x3 zero-padded local mean (sum / 9). Ties go to the
/// smallest (row, col).
/// band selects one entry of per_band; nullopt selects the summed v_s.
CircleDetection detect_circle_center(const CircularAccumulation& acc, std::optional<std::size_t> band = std::nullopt);

}  // namespace dagrid
