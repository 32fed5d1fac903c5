#include "dagrid/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dagrid {

Tensor finite_difference(const ScalarFn& f, const Tensor& x, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite_difference: step must be > 0");
    Tensor grad(x.channels(), x.height(), x.width());
    Tensor probe = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
        probe[k] = x[k] + h;
        const double up = f(probe);
        probe[k] = x[k] - h;
        const double down = f(probe);
        probe[k] = x[k];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw OracleFailure("finite_difference: non-finite function value at element " + std::to_string(k));
        }
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

GradReport check(const std::string& op, const Tensor& analytic, const Tensor& numeric, double tol) {
    if (!analytic.same_shape(numeric)) {
        throw InvalidArgument("check(" + op + "): analytic " + analytic.shape_string() + " vs numeric " +
                              numeric.shape_string());
    }
    GradReport r;
    r.op = op;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double a = analytic[k];
        const double n = numeric[k];
        const double abs_err = std::abs(a - n);
        const double rel_err = abs_err / std::max({std::abs(a), std::abs(n), 1e-12});
        r.max_abs_err = std::max(r.max_abs_err, abs_err);
        if (rel_err > r.max_rel_err) {
            r.max_rel_err = rel_err;
            r.worst_index = k;
        }
    }
    r.passed = r.max_rel_err < tol;
    return r;
}

}  // namespace dagrid
