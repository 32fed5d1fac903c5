#pragma once

// Randomized verification suites shared by the CLI and the acceptance tests:
// finite-difference checks of every backward pass and the inner-product
// adjoint test between accumulation and slicing.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dagrid/accumulate.hpp"
#include "dagrid/gradcheck.hpp"

namespace dagrid {

/// Seeded source of uniform doubles with 53-bit resolution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

private:
    std::mt19937_64 engine_;
};

Tensor random_tensor(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double lo, double hi);

/// Coordinates k + f with integer k in [lo, hi] and fraction f in
/// [margin, 1 - margin], so no value is within margin of a kernel kink.
SamplingGrid random_grid(Rng& rng, std::size_t h, std::size_t w, long long lo, long long hi, double margin);

/// Neumaier-compensated inner product; used as the scalar loss in gradient
/// checks so its own rounding stays well below the finite-difference signal.
double compensated_dot(const Tensor& a, const Tensor& b);

/// Gradient-check operations understood by gradcheck_suite.
const std::vector<std::string>& gradcheck_ops();

struct GradSuiteOptions {
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    double step = kDefaultStep;
    double margin = 0.05;
    KernelKind kernel = KernelKind::Bilinear;
};

/// Runs trials of one operation (see gradcheck_ops) and returns one report
/// per compared gradient per trial. Grid gradients always use the bilinear
/// kernel.
std::vector<GradReport> gradcheck_suite(const std::string& op, const GradSuiteOptions& opts);

struct AdjointReport {
    std::size_t instances = 0;
    double max_rel_err = 0.0;
};

/// <accumulate(U), V> against <U, slice(V)> over random instances cycling
/// both kernels, grid counts {1, 2, 5}, both column rules and sizes up to 64.
AdjointReport adjoint_suite(std::size_t instances, std::uint64_t seed);

/// FNV-1a over the IEEE-754 bytes of every element.
std::uint64_t checksum(const Tensor& t) noexcept;

/// Fixed accumulate/slice workload at size x size: one channel, two grids
/// mostly in bounds, and an upstream tensor for slicing.
struct BenchCase {
    Tensor u;
    GridSet grids;
    Tensor v;
};
BenchCase bench_case(std::size_t size, std::uint64_t seed);

}  // namespace dagrid
