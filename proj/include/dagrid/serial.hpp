#pragma once

// Single-threaded reference versions of the scatter/gather kernels. They
// share the tap enumeration with the parallel kernels but visit sources in
// plain (grid, row, column) order with one output buffer. Tests and the
// benchmark compare the OpenMP kernels against them.

#include "dagrid/accumulate.hpp"

namespace dagrid::serial {

Tensor accumulate(const Tensor& u, const GridSet& grids, KernelKind kind, TargetShape shape,
                  Wrap wrap = Wrap::None);

Tensor slice(const Tensor& v, const GridSet& grids, KernelKind kind, Shape2 source_shape, Wrap wrap = Wrap::None);

}  // namespace dagrid::serial
