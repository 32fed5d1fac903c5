#pragma once

#include <cstddef>
#include <vector>

#include "dagrid/kernels.hpp"
#include "dagrid/tensor.hpp"

namespace dagrid {

/// Fractional target coordinates for every cell of an H x W source:
/// gx holds the row coordinate, gy the column coordinate. Both are 1 x H x W.
struct SamplingGrid {
    Tensor gx;
    Tensor gy;

    std::size_t height() const noexcept { return gx.height(); }
    std::size_t width() const noexcept { return gx.width(); }

    /// The integer mesh grid, which maps every cell onto itself.
    static SamplingGrid identity(std::size_t height, std::size_t width);

    /// Throws InvalidArgument unless gx and gy are 1 x H x W and finite.
    void validate() const;
};

/// Ordered, non-empty list of grids over one source shape.
using GridSet = std::vector<SamplingGrid>;

struct Shape2 {
    std::size_t height = 0;
    std::size_t width = 0;
};

/// Spatial shape H' x W' of an accumulator grid.
struct TargetShape {
    std::size_t height = 0;
    std::size_t width = 0;
};

/// Accumulated values with their homogeneous weight plane.
struct AccumulatorGrid {
    Tensor values;   // C x H' x W'
    Tensor weights;  // 1 x H' x W'
    bool normalized = false;
};

inline constexpr double kDefaultEpsilon = 1e-8;

/// Checks that grids is non-empty and every member is a valid grid over
/// (height, width). Throws InvalidArgument otherwise.
void validate_grid_set(const GridSet& grids, std::size_t height, std::size_t width);

/// Directed accumulation: every source cell of u splats its value through each
/// grid into a C x H' x W' target with weight K(gx, i) K(gy, j).
Tensor accumulate(const Tensor& u, const GridSet& grids, KernelKind kind, TargetShape shape,
                  Wrap wrap = Wrap::None);

/// Accumulation of a tensor of ones: the homogeneous weight plane.
Tensor accumulate_weights(const GridSet& grids, KernelKind kind, Shape2 source_shape, TargetShape shape,
                          Wrap wrap = Wrap::None);

/// Accumulates both the values and the weight plane, unnormalized.
AccumulatorGrid accumulate_homogeneous(const Tensor& u, const GridSet& grids, KernelKind kind,
                                       TargetShape shape, Wrap wrap = Wrap::None);

/// Divides values by (weights + epsilon). Requires an unnormalized grid.
AccumulatorGrid normalize(AccumulatorGrid acc, double epsilon = kDefaultEpsilon);

/// Slicing: every source-space cell reads the target grid v at its grid
/// coordinates, summed over all grids. Out-of-range reads contribute zero.
Tensor slice(const Tensor& v, const GridSet& grids, KernelKind kind, Shape2 source_shape,
             Wrap wrap = Wrap::None);

/// Classical grid sampling; the output takes the grid's spatial shape.
Tensor grid_sample(const Tensor& u, const SamplingGrid& grid, KernelKind kind, Wrap wrap = Wrap::None);

/// Gradient of a loss with respect to the accumulated input: the slice of the
/// upstream gradient through the same grids.
Tensor accumulate_backward_input(const Tensor& d_v, const GridSet& grids, KernelKind kind,
                                 Shape2 source_shape, Wrap wrap = Wrap::None);

/// Gradient of a loss with respect to the slicing input: the accumulation of
/// the upstream gradient through the same grids.
Tensor slice_backward(const Tensor& d_u, const GridSet& grids, KernelKind kind, TargetShape shape,
                      Wrap wrap = Wrap::None);

struct UnsupportedKernel : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

/// Per-grid gradient pair (d gx, d gy) of the accumulation with respect to
/// its sampling grids. Bilinear only; Nearest grids carry no gradient and
/// raise UnsupportedKernel.
GridSet accumulate_backward_grid(const Tensor& d_v, const Tensor& u, const GridSet& grids, KernelKind kind,
                                 Wrap wrap = Wrap::None);

/// Per-grid gradient pair of slicing with respect to its sampling grids.
GridSet slice_backward_grid(const Tensor& d_u, const Tensor& v, const GridSet& grids, KernelKind kind,
                            Wrap wrap = Wrap::None);

/// grid_sample's grid gradient; the N = 1 case of slice_backward_grid.
SamplingGrid grid_sample_backward_grid(const Tensor& d_out, const Tensor& u, const SamplingGrid& grid,
                                       KernelKind kind, Wrap wrap = Wrap::None);

}  // namespace dagrid
