#include "doctest.h"

#include <cmath>

#include "dagrid/accumulate.hpp"
#include "dagrid/serial.hpp"
#include "dagrid/suites.hpp"
#include "oracle.hpp"

using namespace dagrid;

namespace {

SamplingGrid grid_from(std::vector<std::vector<double>> gx, std::vector<std::vector<double>> gy) {
    return {Tensor::from_rows(gx), Tensor::from_rows(gy)};
}

}  // namespace

TEST_CASE("two pixels splat onto one target") {
    const auto u = Tensor::from_rows({{1, 2}});
    const auto g = grid_from({{0, 0}}, {{0.5, 0.5}});
    const auto v = accumulate(u, {g}, KernelKind::Bilinear, {1, 2});
    CHECK(v == Tensor::from_rows({{1.5, 1.5}}));

    const auto acc = normalize(accumulate_homogeneous(u, {g}, KernelKind::Bilinear, {1, 2}));
    CHECK(acc.weights == Tensor::from_rows({{1, 1}}));
    CHECK(acc.values(0, 0, 0) == doctest::Approx(1.5 / (1 + 1e-8)).epsilon(1e-15));
    CHECK(acc.normalized);
    CHECK_THROWS_AS(normalize(acc), InvalidArgument);
}

TEST_CASE("out-of-bounds contributions vanish") {
    const auto u = Tensor::from_rows({{5}});
    const auto v = accumulate(u, {grid_from({{-3}}, {{0}})}, KernelKind::Bilinear, {2, 2});
    CHECK(v.sum() == 0.0);
    const auto half = accumulate(u, {grid_from({{-0.5}}, {{0}})}, KernelKind::Bilinear, {2, 2});
    CHECK(half(0, 0, 0) == 2.5);
    CHECK(half.sum() == 2.5);
}

TEST_CASE("grid validation") {
    const auto u = Tensor::from_rows({{1, 2}});
    CHECK_THROWS_AS(accumulate(u, {}, KernelKind::Bilinear, {2, 2}), InvalidArgument);
    CHECK_THROWS_AS(accumulate(u, {grid_from({{0}}, {{0}})}, KernelKind::Bilinear, {2, 2}), InvalidArgument);
    CHECK_THROWS_AS(accumulate(u, {grid_from({{0, NAN}}, {{0, 0}})}, KernelKind::Bilinear, {2, 2}), InvalidArgument);
    CHECK_THROWS_AS(accumulate(u, {grid_from({{0, 0}}, {{0, 0}})}, KernelKind::Bilinear, {0, 2}), InvalidArgument);
}

TEST_CASE("identity grid reproduces the input") {
    Rng rng(5);
    const auto u = random_tensor(rng, 3, 7, 9, -1, 1);
    const GridSet id{SamplingGrid::identity(7, 9)};
    for (auto kind : {KernelKind::Nearest, KernelKind::Bilinear}) {
        CHECK(max_abs_diff(accumulate(u, id, kind, {7, 9}), u) == 0.0);
        CHECK(max_abs_diff(slice(u, id, kind, {7, 9}), u) == 0.0);
        CHECK(max_abs_diff(grid_sample(u, id[0], kind), u) == 0.0);
    }
}

TEST_CASE("grid_sample equals slice with one grid") {
    Rng rng(6);
    const auto u = random_tensor(rng, 2, 6, 5, -1, 1);
    const auto g = random_grid(rng, 4, 8, -1, 6, 0.0);
    CHECK(grid_sample(u, g, KernelKind::Bilinear) == slice(u, {g}, KernelKind::Bilinear, {4, 8}));
}

TEST_CASE("matches the brute-force oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const auto kind = trial % 2 ? KernelKind::Nearest : KernelKind::Bilinear;
        const bool periodic = trial % 3 == 0;
        const auto wrap = periodic ? Wrap::Columns : Wrap::None;
        CAPTURE(trial);
        const std::size_t h = 1 + rng.index(6), w = 1 + rng.index(6), th = 1 + rng.index(6), tw = 1 + rng.index(6);
        GridSet grids;
        for (std::size_t n = 0; n < 1 + rng.index(3); ++n) grids.push_back(random_grid(rng, h, w, -2, 7, 0.0));
        const auto u = random_tensor(rng, 2, h, w, -1, 1);
        const auto v = random_tensor(rng, 2, th, tw, -1, 1);
        CHECK(max_abs_diff(accumulate(u, grids, kind, {th, tw}, wrap), oracle::accumulate(u, grids, kind, th, tw, periodic)) <
              1e-12);
        CHECK(max_abs_diff(slice(v, grids, kind, {h, w}, wrap), oracle::slice(v, grids, kind, h, w, periodic)) < 1e-12);
    }
}

TEST_CASE("accumulate and slice are adjoint") {
    const auto rep = adjoint_suite(40, 3);
    CHECK(rep.instances == 40);
    CHECK(rep.max_rel_err < 1e-10);
}

TEST_CASE("bilinear mass is conserved for in-bounds grids") {
    Rng rng(8);
    const auto u = random_tensor(rng, 1, 10, 10, 0, 1);
    const auto g = random_grid(rng, 10, 10, 0, 8, 0.0);
    const auto v = accumulate(u, {g}, KernelKind::Bilinear, {10, 10});
    CHECK(std::fabs(v.sum() - u.sum()) / u.sum() < 1e-12);
}

TEST_CASE("weights count the kernel mass per target") {
    const auto g = grid_from({{0, 0, 1}}, {{0, 0.5, 1}});
    const auto w = accumulate_weights({g}, KernelKind::Bilinear, {1, 3}, {2, 2});
    CHECK(w == Tensor::from_rows({{1.5, 0.5}, {0, 1}}));
}

TEST_CASE("grid gradient of a single splat") {
    // One unit pixel at gx = 0.5 between rows 0 and 1: moving it toward row 1
    // shifts mass from row 0 to row 1 at unit rate.
    const auto u = Tensor::from_rows({{1}});
    const auto g = grid_from({{0.5}}, {{0}});
    const auto d_v = Tensor::from_rows({{1}, {0}});
    const auto dg = accumulate_backward_grid(d_v, u, {g}, KernelKind::Bilinear);
    REQUIRE(dg.size() == 1);
    CHECK(dg[0].gx(0, 0, 0) == -1.0);
    CHECK(dg[0].gy(0, 0, 0) == 0.0);
    CHECK_THROWS_AS(accumulate_backward_grid(d_v, u, {g}, KernelKind::Nearest), UnsupportedKernel);
}

TEST_CASE("serial reference agrees with the parallel path") {
    Rng rng(9);
    const auto u = random_tensor(rng, 2, 40, 33, -1, 1);
    GridSet grids{random_grid(rng, 40, 33, -2, 40, 0.0), random_grid(rng, 40, 33, -2, 40, 0.0)};
    for (auto wrap : {Wrap::None, Wrap::Columns}) {
        CHECK(max_abs_diff(accumulate(u, grids, KernelKind::Bilinear, {35, 30}, wrap),
                           serial::accumulate(u, grids, KernelKind::Bilinear, {35, 30}, wrap)) < 1e-13);
        const auto v = random_tensor(rng, 2, 35, 30, -1, 1);
        // gathers have no cross-row reduction, so the order is the same
        CHECK(slice(v, grids, KernelKind::Bilinear, {40, 33}, wrap) ==
              serial::slice(v, grids, KernelKind::Bilinear, {40, 33}, wrap));
    }
}
