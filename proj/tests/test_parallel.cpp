#include "doctest.h"

#include "dagrid/accumulate.hpp"
#include "dagrid/parallel.hpp"
#include "dagrid/polar.hpp"
#include "dagrid/serial.hpp"
#include "dagrid/suites.hpp"

using namespace dagrid;

TEST_CASE("partition count depends only on the source height") {
    CHECK(scatter_partitions(1) == 1);
    CHECK(scatter_partitions(8) == 1);
    CHECK(scatter_partitions(64) == 8);
    CHECK(scatter_partitions(4096) == 16);
}

TEST_CASE("results are bit-identical across worker counts") {
    Rng rng(41);
    const auto u = random_tensor(rng, 2, 96, 80, -1, 1);
    const GridSet grids{random_grid(rng, 96, 80, -3, 90, 0.0), random_grid(rng, 96, 80, -3, 90, 0.0)};
    const auto v = random_tensor(rng, 2, 90, 90, -1, 1);
    const int saved = workers();

    set_workers(1);
    const auto ref_acc = accumulate(u, grids, KernelKind::Bilinear, {90, 90}, Wrap::Columns);
    const auto ref_slice = serial::slice(v, grids, KernelKind::Bilinear, {96, 80}, Wrap::Columns);
    CHECK(max_abs_diff(ref_acc, serial::accumulate(u, grids, KernelKind::Bilinear, {90, 90}, Wrap::Columns)) < 1e-12);
    for (int n : {1, 2, 4, 7}) {
        set_workers(n);
        CAPTURE(n);
        CHECK(accumulate(u, grids, KernelKind::Bilinear, {90, 90}, Wrap::Columns) == ref_acc);
        CHECK(slice(v, grids, KernelKind::Bilinear, {96, 80}, Wrap::Columns) == ref_slice);
    }
    set_workers(saved);
    CHECK_THROWS_AS(set_workers(0), InvalidArgument);
}
