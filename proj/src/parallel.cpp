#include "dagrid/parallel.hpp"

#include <algorithm>

#include <omp.h>

#include "dagrid/tensor.hpp"

namespace dagrid {

namespace {
constexpr std::size_t kMaxPartitions = 16;
constexpr std::size_t kMinRowsPerPartition = 8;
}  // namespace

int workers() noexcept { return omp_get_max_threads(); }

int processors() noexcept { return omp_get_num_procs(); }

void set_workers(int n) {
    if (n < 1) throw InvalidArgument("worker count must be >= 1, got " + std::to_string(n));
    omp_set_num_threads(n);
}

std::size_t scatter_partitions(std::size_t source_rows) noexcept {
    return std::clamp<std::size_t>(source_rows / kMinRowsPerPartition, 1, kMaxPartitions);
}

}  // namespace dagrid
