#include "dagrid/suites.hpp"

#include <cmath>
#include <cstring>
#include <functional>

#include "dagrid/circular.hpp"
#include "dagrid/polar.hpp"

namespace dagrid {

Tensor random_tensor(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double lo, double hi) {
    Tensor t(c, h, w);
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

SamplingGrid random_grid(Rng& rng, std::size_t h, std::size_t w, long long lo, long long hi, double margin) {
    SamplingGrid g{Tensor(1, h, w), Tensor(1, h, w)};
    const auto span = static_cast<std::size_t>(hi - lo + 1);
    for (Tensor* plane : {&g.gx, &g.gy}) {
        for (double& v : plane->values()) {
            v = static_cast<double>(lo + static_cast<long long>(rng.index(span))) + rng.uniform(margin, 1.0 - margin);
        }
    }
    return g;
}

double compensated_dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw InvalidArgument("compensated_dot: shape mismatch");
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        // Exact product split into value and rounding error.
        const double p = a[k] * b[k];
        const double perr = std::fma(a[k], b[k], -p);
        const double t = sum + p;
        comp += std::abs(sum) >= std::abs(p) ? (sum - t) + p : (p - t) + sum;
        comp += perr;
        sum = t;
    }
    return sum + comp;
}

const std::vector<std::string>& gradcheck_ops() {
    static const std::vector<std::string> ops{"accumulate",       "accumulate-grid",  "slice",
                                              "slice-grid",       "grid-sample",      "grid-sample-grid",
                                              "parametric-slice", "circular",         "circular-grid"};
    return ops;
}

namespace {

Tensor pack(const GridSet& grids) {
    const std::size_t h = grids.front().height();
    const std::size_t w = grids.front().width();
    Tensor t(2 * grids.size(), h, w);
    for (std::size_t k = 0; k < grids.size(); ++k) {
        std::copy(grids[k].gx.values().begin(), grids[k].gx.values().end(), t.plane(2 * k).begin());
        std::copy(grids[k].gy.values().begin(), grids[k].gy.values().end(), t.plane(2 * k + 1).begin());
    }
    return t;
}

GridSet unpack(const Tensor& t) {
    GridSet grids(t.channels() / 2, SamplingGrid{Tensor(1, t.height(), t.width()), Tensor(1, t.height(), t.width())});
    for (std::size_t k = 0; k < grids.size(); ++k) {
        std::copy(t.plane(2 * k).begin(), t.plane(2 * k).end(), grids[k].gx.values().begin());
        std::copy(t.plane(2 * k + 1).begin(), t.plane(2 * k + 1).end(), grids[k].gy.values().begin());
    }
    return grids;
}

// Positive upstream weights with a monotone ramp: keeps differences of
// neighbouring cells (what the grid gradients see) away from zero.
Tensor ramp_tensor(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
    Tensor t(c, h, w);
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                t(ch, i, j) = 1.0 + static_cast<double>(i) + 2.0 * static_cast<double>(j) + rng.uniform(-0.2, 0.2);
    return t;
}

Tensor radial_tensor(Rng& rng, std::size_t h, std::size_t w, double slope, double jitter) {
    const double pi = -3.0 - rng.uniform(0.0, 2.0);
    const double pj = -3.0 - rng.uniform(0.0, 2.0);
    Tensor t(1, h, w);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            t(0, i, j) = 1.0 + slope * std::hypot(static_cast<double>(i) - pi, static_cast<double>(j) - pj) +
                         rng.uniform(0.0, jitter);
    return t;
}

struct Dims {
    std::size_t c, h, w, th, tw, n;
};

Dims random_dims(Rng& rng, std::size_t max_grids) {
    return {1 + rng.index(2), 3 + rng.index(6), 3 + rng.index(6), 3 + rng.index(6), 3 + rng.index(6),
            1 + rng.index(max_grids)};
}

GridSet in_bounds_grids(Rng& rng, const Dims& d, double margin) {
    GridSet grids;
    for (std::size_t k = 0; k < d.n; ++k) {
        SamplingGrid g{Tensor(1, d.h, d.w), Tensor(1, d.h, d.w)};
        g.gx = random_grid(rng, d.h, d.w, 0, static_cast<long long>(d.th) - 2, margin).gx;
        g.gy = random_grid(rng, d.h, d.w, 0, static_cast<long long>(d.tw) - 2, margin).gy;
        grids.push_back(std::move(g));
    }
    return grids;
}

GradReport run_check(const std::string& name, const ScalarFn& f, const Tensor& x, const Tensor& analytic,
                     const GradSuiteOptions& o) {
    return check(name, analytic, finite_difference(f, x, o.step), o.tol);
}

void trial(const std::string& op, Rng& rng, const GradSuiteOptions& o, std::vector<GradReport>& out) {
    const KernelKind kind = o.kernel;
    const KernelKind bil = KernelKind::Bilinear;

    if (op == "accumulate" || op == "accumulate-grid") {
        const Dims d = random_dims(rng, 2);
        const GridSet grids = in_bounds_grids(rng, d, o.margin);
        const TargetShape ts{d.th, d.tw};
        const Tensor u = random_tensor(rng, d.c, d.h, d.w, 0.5, 1.5);
        if (op == "accumulate") {
            const Tensor r = random_tensor(rng, d.c, d.th, d.tw, 0.5, 1.5);
            auto f = [&](const Tensor& x) { return compensated_dot(accumulate(x, grids, kind, ts), r); };
            out.push_back(run_check(op, f, u, accumulate_backward_input(r, grids, kind, {d.h, d.w}), o));
        } else {
            const Tensor r = ramp_tensor(rng, d.c, d.th, d.tw);
            auto f = [&](const Tensor& x) { return compensated_dot(accumulate(u, unpack(x), bil, ts), r); };
            out.push_back(run_check(op, f, pack(grids), pack(accumulate_backward_grid(r, u, grids, bil)), o));
        }
        return;
    }

    if (op == "slice" || op == "slice-grid" || op == "grid-sample" || op == "grid-sample-grid") {
        const bool single = op.starts_with("grid-sample");
        const Dims d = random_dims(rng, single ? 1 : 2);
        const GridSet grids = in_bounds_grids(rng, d, o.margin);
        const Shape2 src{d.h, d.w};
        auto forward = [&](const Tensor& v, const GridSet& g, KernelKind k) {
            return single ? grid_sample(v, g.front(), k) : slice(v, g, k, src);
        };
        const Tensor r = random_tensor(rng, d.c, d.h, d.w, 0.5, 1.5);
        if (!op.ends_with("-grid")) {
            const Tensor v = random_tensor(rng, d.c, d.th, d.tw, 0.5, 1.5);
            auto f = [&](const Tensor& x) { return compensated_dot(forward(x, grids, kind), r); };
            out.push_back(run_check(op, f, v, slice_backward(r, grids, kind, {d.th, d.tw}), o));
        } else {
            const Tensor v = ramp_tensor(rng, d.c, d.th, d.tw);
            auto f = [&](const Tensor& x) { return compensated_dot(forward(v, unpack(x), bil), r); };
            const GridSet analytic = single ? GridSet{grid_sample_backward_grid(r, v, grids.front(), bil)}
                                            : slice_backward_grid(r, v, grids, bil);
            out.push_back(run_check(op, f, pack(grids), pack(analytic), o));
        }
        return;
    }

    if (op == "parametric-slice") {
        const std::size_t h = 4 + rng.index(5);
        const std::size_t w = 4 + rng.index(5);
        const std::size_t c = 1 + rng.index(2);
        const auto cfg = PolarConfig::for_image(h, w, 3 + rng.index(3), 4 + rng.index(6));
        const Tensor p = random_tensor(rng, c, cfg.h_r, cfg.w_psi, 0.5, 1.5);
        ParametricSlicer slicer(h, w);
        for (double& v : slicer.values()) v = rng.uniform(0.5, 1.5);
        const Tensor r = random_tensor(rng, c, h, w, 0.5, 1.5);
        const auto grad = parametric_slice_backward(r, p, slicer, cfg);

        auto fp = [&](const Tensor& x) { return compensated_dot(parametric_slice(x, slicer, cfg), r); };
        out.push_back(run_check("parametric-slice:p", fp, p, grad.d_p, o));

        const Tensor l_flat(1, h * w, 4, slicer.values());
        auto fl = [&](const Tensor& x) {
            ParametricSlicer s(h, w);
            s.values() = x.raw();
            return compensated_dot(parametric_slice(p, s, cfg), r);
        };
        out.push_back(run_check("parametric-slice:l", fl, l_flat, Tensor(1, h * w, 4, grad.d_l.values()), o));
        return;
    }

    if (op == "circular") {
        const std::size_t h = 5 + rng.index(4);
        const std::size_t w = 5 + rng.index(4);
        // Image and upstream both rise away from a pole outside the image so
        // the two ends of a symmetric ray pair see different upstream values.
        const Tensor u = radial_tensor(rng, h, w, 0.3, 0.1);
        const GradientField field = sobel_gradient_field(u);
        CircularConfig cfg;
        cfg.radii = {2 + rng.index(3)};
        cfg.symmetric = rng.uniform() < 0.5 ? false : true;
        cfg.kernel = kind;
        const Tensor r = radial_tensor(rng, h, w, 0.5, 0.2);
        const auto grad = circular_backward(r, r, u, field, cfg);

        // Magnitude path with the rays held fixed; cells with S < 10 eps are
        // excluded from the comparison.
        auto fs = [&](const Tensor& x) {
            GradientField g = field;
            g.magnitude = x;
            return compensated_dot(circular_accumulate(u, g, cfg).v_s, r);
        };
        Tensor numeric = finite_difference(fs, field.magnitude, o.step);
        Tensor analytic = grad.d_magnitude;
        for (std::size_t k = 0; k < numeric.size(); ++k) {
            if (field.magnitude[k] < 10.0 * field.epsilon) numeric[k] = analytic[k] = 0.0;
        }
        out.push_back(check("circular:s", analytic, numeric, o.tol));

        auto fu = [&](const Tensor& x) { return compensated_dot(circular_accumulate(x, field, cfg).v_u, r); };
        out.push_back(run_check("circular:u", fu, u, grad.d_u, o));
        return;
    }

    if (op == "circular-grid") {
        // Direction planes chosen so every ray coordinate k * unit + mesh
        // (k = 1, 2) stays at least margin away from an integer.
        const std::size_t h = 5 + rng.index(4);
        const std::size_t w = 5 + rng.index(4);
        const Tensor u = random_tensor(rng, 1, h, w, 0.5, 1.5);
        GradientField field = sobel_gradient_field(u);
        const double hi = 0.5 - o.margin;
        for (Tensor* plane : {&field.unit_x, &field.unit_y}) {
            for (double& v : plane->values()) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(o.margin, hi);
        }
        for (double& v : field.magnitude.values()) v = rng.uniform(0.5, 1.5);
        CircularConfig cfg;
        cfg.radii = {2};
        cfg.symmetric = true;
        const Tensor r = ramp_tensor(rng, 1, h, w);
        const auto grad = circular_backward(r, r, u, field, cfg);

        Tensor x0(2, h, w);
        std::copy(field.unit_x.values().begin(), field.unit_x.values().end(), x0.plane(0).begin());
        std::copy(field.unit_y.values().begin(), field.unit_y.values().end(), x0.plane(1).begin());
        auto f = [&](const Tensor& x) {
            GradientField g = field;
            std::copy(x.plane(0).begin(), x.plane(0).end(), g.unit_x.values().begin());
            std::copy(x.plane(1).begin(), x.plane(1).end(), g.unit_y.values().begin());
            const auto acc = circular_accumulate(u, g, cfg);
            return compensated_dot(acc.v_s, r) + compensated_dot(acc.v_u, r);
        };
        Tensor analytic(2, h, w);
        std::copy(grad.d_unit_x.values().begin(), grad.d_unit_x.values().end(), analytic.plane(0).begin());
        std::copy(grad.d_unit_y.values().begin(), grad.d_unit_y.values().end(), analytic.plane(1).begin());
        out.push_back(run_check(op, f, x0, analytic, o));
        return;
    }

    throw InvalidArgument("unknown gradcheck op '" + op + "'");
}

}  // namespace

std::vector<GradReport> gradcheck_suite(const std::string& op, const GradSuiteOptions& opts) {
    Rng rng(opts.seed);
    std::vector<GradReport> reports;
    for (std::size_t t = 0; t < opts.trials; ++t) trial(op, rng, opts, reports);
    return reports;
}

AdjointReport adjoint_suite(std::size_t instances, std::uint64_t seed) {
    Rng rng(seed);
    constexpr std::size_t kGridCounts[] = {1, 2, 5};
    AdjointReport report;
    for (std::size_t t = 0; t < instances; ++t) {
        const KernelKind kind = t % 2 == 0 ? KernelKind::Bilinear : KernelKind::Nearest;
        const std::size_t n = kGridCounts[(t / 2) % 3];
        const Wrap wrap = (t / 6) % 2 == 0 ? Wrap::None : Wrap::Columns;
        // Mostly small shapes, with every fourth instance up to 64 x 64.
        const std::size_t cap = t % 4 == 3 ? 64 : 12;
        const std::size_t c = 1 + rng.index(3);
        const std::size_t h = 1 + rng.index(cap), w = 1 + rng.index(cap);
        const std::size_t th = 1 + rng.index(cap), tw = 1 + rng.index(cap);

        GridSet grids;
        for (std::size_t k = 0; k < n; ++k) {
            SamplingGrid g{Tensor(1, h, w), Tensor(1, h, w)};
            for (double& v : g.gx.values()) v = rng.uniform(-2.0, static_cast<double>(th) + 1.0);
            for (double& v : g.gy.values()) v = rng.uniform(-2.0, static_cast<double>(tw) + 1.0);
            grids.push_back(std::move(g));
        }
        const Tensor u = random_tensor(rng, c, h, w, 0.0, 1.0);
        const Tensor v = random_tensor(rng, c, th, tw, 0.0, 1.0);
        const double lhs = dot(accumulate(u, grids, kind, {th, tw}, wrap), v);
        const double rhs = dot(u, slice(v, grids, kind, {h, w}, wrap));
        const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        const double rel = (lhs == rhs) ? 0.0 : std::abs(lhs - rhs) / scale;
        report.max_rel_err = std::max(report.max_rel_err, rel);
        ++report.instances;
    }
    return report;
}

std::uint64_t checksum(const Tensor& t) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : t.values()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

BenchCase bench_case(std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    const auto n = static_cast<long long>(size);
    BenchCase bc;
    bc.u = random_tensor(rng, 1, size, size, 0.0, 1.0);
    for (int k = 0; k < 2; ++k) bc.grids.push_back(random_grid(rng, size, size, -1, n - 1, 0.0));
    bc.v = random_tensor(rng, 1, size, size, 0.0, 1.0);
    return bc;
}

}  // namespace dagrid
