#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include "dagrid/tensor.hpp"

namespace dagrid {

struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultStep = 1e-5;

using ScalarFn = std::function<double(const Tensor&)>;

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h for every element.
/// Throws OracleFailure if f returns a non-finite value.
Tensor finite_difference(const ScalarFn& f, const Tensor& x, double h = kDefaultStep);

struct GradReport {
    std::string op;
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    bool passed = true;
};

/// Elementwise comparison with rel = |a - n| / max(|a|, |n|, 1e-12);
/// passed iff the largest rel is below tol.
GradReport check(const std::string& op, const Tensor& analytic, const Tensor& numeric, double tol);

}  // namespace dagrid
