#pragma once

#include <cstddef>

namespace dagrid {

/// Worker count used by the OpenMP kernels. Defaults to the OpenMP runtime's
/// maximum. Results never depend on this value.
int workers() noexcept;

/// Processors available to this process.
int processors() noexcept;
void set_workers(int n);

/// Number of fixed source partitions used by scatter kernels. Depends only on
/// the problem size, never on the worker count, so merged sums are identical
/// for any number of threads.
std::size_t scatter_partitions(std::size_t source_rows) noexcept;

}  // namespace dagrid
