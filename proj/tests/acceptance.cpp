// Acceptance checks. Prints one line per criterion and exits non-zero if any
// criterion fails. Lines marked INFO are reference measurements, not criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dagrid/accumulate.hpp"
#include "dagrid/circular.hpp"
#include "dagrid/io.hpp"
#include "dagrid/parallel.hpp"
#include "dagrid/polar.hpp"
#include "dagrid/suites.hpp"
#include "oracle.hpp"

using namespace dagrid;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* id, bool ok, const std::string& text) {
    std::printf("[%s] %-3s %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const char* id, const std::string& text) {
    std::printf("[INFO] %-3s %s\n", id, text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void criterion_adjoint() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = adjoint_suite(120, 2024);
    const double dt = seconds_since(t0);
    report("1", rep.instances >= 100 && rep.max_rel_err < 1e-10 && dt < 10.0,
           fmt("adjoint identity: %zu instances, max rel err %.3e (< 1e-10), %.2f s (< 10 s)", rep.instances,
               rep.max_rel_err, dt));
}

void criterion_gradcheck() {
    const auto t0 = std::chrono::steady_clock::now();
    GradSuiteOptions opts;
    opts.trials = 20;
    opts.seed = 7;
    opts.tol = 1e-6;
    opts.step = 1e-5;
    opts.margin = 0.05;
    double worst = 0.0;
    std::string worst_op;
    std::size_t checks = 0;
    bool ok = true;
    for (const auto& op : gradcheck_ops()) {
        for (const auto kind : {KernelKind::Bilinear, KernelKind::Nearest}) {
            // grid gradients and the ray-direction check exist for bilinear only
            if (kind == KernelKind::Nearest && (op.ends_with("-grid") || op == "parametric-slice")) continue;
            opts.kernel = kind;
            for (const auto& r : gradcheck_suite(op, opts)) {
                ++checks;
                ok = ok && r.passed;
                if (r.max_rel_err >= worst) {
                    worst = r.max_rel_err;
                    worst_op = r.op + "/" + std::string(to_string(kind));
                }
            }
        }
    }
    const double dt = seconds_since(t0);
    report("2", ok && worst < 1e-6 && dt < 60.0,
           fmt("finite-difference gradients: %zu checks (20 trials per op), max rel err %.3e at %s (< 1e-6), %.2f s "
               "(< 60 s)",
               checks, worst, worst_op.c_str(), dt));
}

void criterion_mass() {
    Rng rng(3);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t c = 1 + rng.index(3), h = 2 + rng.index(30), w = 2 + rng.index(30);
        const std::size_t th = 2 + rng.index(30), tw = 2 + rng.index(30);
        SamplingGrid g{Tensor(1, h, w), Tensor(1, h, w)};
        for (double& v : g.gx.values()) v = rng.uniform(0.0, static_cast<double>(th - 1));
        for (double& v : g.gy.values()) v = rng.uniform(0.0, static_cast<double>(tw - 1));
        const auto u = random_tensor(rng, c, h, w, 0.0, 1.0);
        const auto v = accumulate(u, {g}, KernelKind::Bilinear, {th, tw});
        worst = std::max(worst, std::abs(v.sum() - u.sum()) / std::abs(u.sum()));
    }
    report("3", worst < 1e-9, fmt("mass conservation: 50 trials, max |sum V - sum U| / |sum U| = %.3e (< 1e-9)", worst));
}

void criterion_identity() {
    Rng rng(4);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const std::size_t c = 1 + rng.index(3), h = 1 + rng.index(40), w = 1 + rng.index(40);
        const auto u = random_tensor(rng, c, h, w, -1.0, 1.0);
        const auto id = SamplingGrid::identity(h, w);
        for (const auto kind : {KernelKind::Nearest, KernelKind::Bilinear}) {
            worst = std::max(worst, max_abs_diff(accumulate(u, {id}, kind, {h, w}), u));
            worst = std::max(worst, max_abs_diff(slice(u, {id}, kind, {h, w}), u));
            worst = std::max(worst, max_abs_diff(grid_sample(u, id, kind), u));
        }
    }
    report("4", worst < 1e-12, fmt("identity-grid idempotence: max abs diff %.3e (< 1e-12)", worst));
}

Tensor rotate90(const Tensor& u) {
    Tensor out(u.channels(), u.width(), u.height());
    for (std::size_t c = 0; c < u.channels(); ++c)
        for (std::size_t i = 0; i < out.height(); ++i)
            for (std::size_t j = 0; j < out.width(); ++j) out(c, i, j) = u(c, u.height() - 1 - j, i);
    return out;
}

Tensor roll_columns(const Tensor& t, std::size_t shift) {
    Tensor out(t.channels(), t.height(), t.width());
    for (std::size_t c = 0; c < t.channels(); ++c)
        for (std::size_t i = 0; i < t.height(); ++i)
            for (std::size_t j = 0; j < t.width(); ++j) out(c, i, (j + shift) % t.width()) = t(c, i, j);
    return out;
}

void criterion_rotation() {
    Rng rng(5);
    const auto cfg = PolarConfig::for_image(33, 33, 16, 64);
    // out(i, j) = u(32 - j, i) moves every angle by -pi/2, i.e. W/4 bins backwards.
    const std::size_t shift = cfg.w_psi - cfg.w_psi / 4;
    double worst = 0.0, off_pole = 0.0, raw_no_pole = 0.0;
    for (int t = 0; t < 10; ++t) {
        auto u = random_tensor(rng, 1, 33, 33, 0.0, 1.0);
        const auto a = roll_columns(polar_accumulate(u, cfg, KernelKind::Bilinear).values, shift);
        const auto b = polar_accumulate(rotate90(u), cfg, KernelKind::Bilinear).values;
        worst = std::max(worst, max_abs_diff(a, b));
        for (std::size_t r = 1; r < cfg.h_r; ++r)
            for (std::size_t k = 0; k < cfg.w_psi; ++k) off_pole = std::max(off_pole, std::abs(a(0, r, k) - b(0, r, k)));
        u(0, 16, 16) = 0.0;
        const auto ra = roll_columns(polar_accumulate_raw(u, cfg, KernelKind::Bilinear).values, shift);
        const auto rb = polar_accumulate_raw(rotate90(u), cfg, KernelKind::Bilinear).values;
        raw_no_pole = std::max(raw_no_pole, max_abs_diff(ra, rb));
    }
    report("5", worst < 1e-12,
           fmt("polar rotation equivariance: 10 images 33x33, (16,64), max abs diff %.3e (< 1e-12)", worst));
    info("5", fmt("radial rows r >= 1 only: max abs diff %.3e; pole pixel zeroed, unnormalized: %.3e. The centre "
                  "pixel has atan2(0,0) = 0 and stays in angular bin 32 under rotation.",
                  off_pole, raw_no_pole));
}

void criterion_parametric() {
    Rng rng(6);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t h = 4 + rng.index(40), w = 4 + rng.index(40);
        const auto cfg = PolarConfig::for_image(h, w, 2 + rng.index(30), 4 + rng.index(60), t % 2 == 1);
        const auto p = random_tensor(rng, 1 + rng.index(2), cfg.h_r, cfg.w_psi, -1.0, 1.0);
        const auto l = ParametricSlicer::bilinear(h, w, cfg);
        worst = std::max(worst, max_abs_diff(parametric_slice(p, l, cfg), polar_slice(p, cfg, KernelKind::Bilinear, {h, w})));
    }
    report("6", worst < 1e-15,
           fmt("parametric slice at bilinear init vs polar_slice: 20 instances, max abs diff %.3e (< 1e-15)", worst));
}

struct RoundTrip {
    std::vector<double> mse;
    std::string text;
    bool decreasing = true;
};

RoundTrip roundtrip_series(const Tensor& u) {
    RoundTrip rt;
    for (const std::size_t n : kPolarPresets) {
        const auto cfg = PolarConfig::for_image(u.height(), u.width(), n, n);
        const auto out = polar_roundtrip_filter(u, cfg, KernelKind::Bilinear, FilterSpec{});
        const auto cover = polar_coverage(u.height(), u.width(), cfg);
        double s = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (!cover[k]) continue;
            s += (out[k] - u[k]) * (out[k] - u[k]);
            ++count;
        }
        rt.mse.push_back(s / static_cast<double>(count));
        rt.text += fmt("%s%zu: %.4e", rt.text.empty() ? "" : ", ", n, rt.mse.back());
    }
    for (std::size_t k = 1; k < rt.mse.size(); ++k) rt.decreasing = rt.decreasing && rt.mse[k] < rt.mse[k - 1];
    return rt;
}

void criterion_roundtrip() {
    Phantom blob;
    blob.kind = Phantom::Kind::SmoothBlob;  // default sigma 8
    const auto rt = roundtrip_series(synth(blob, {224, 224, {}, 0.0, 0}));
    report("7", rt.decreasing, "polar round-trip MSE strictly decreasing over presets, smooth_blob(8), covered disk: " + rt.text);

    blob.sigmas = {24.0, 32.0, 40.0};
    const auto wide = roundtrip_series(synth(blob, {224, 224, {}, 0.0, 0}));
    info("7", fmt("smooth_blob(24,32,40) for comparison (%s): ", wide.decreasing ? "decreasing" : "not monotone") +
                  wide.text + ". Past about one bin per pixel the error sits at a floor set by the pixel grid.");
}

double central_mass(const Tensor& t, std::size_t ci, std::size_t cj) {
    double s = 0.0;
    for (std::size_t i = ci - 2; i <= ci + 2; ++i)
        for (std::size_t j = cj - 2; j <= cj + 2; ++j) s += std::abs(t(0, i, j));
    return s;
}

struct CircleResult {
    CircleDetection det;
    double fwd = 0.0, bwd = 0.0, sym = 0.0;
};

CircleResult circle_experiment(const Phantom& ph) {
    const auto u = synth(ph, {64, 64, {}, 0.0, 0});
    const auto f = sobel_gradient_field(u);
    CircularConfig cfg;
    cfg.radii = {8};
    const auto acc = circular_accumulate(u, f, cfg);
    const RadiusBand band{0, 8};
    CircleResult r;
    r.det = detect_circle_center(acc);
    r.fwd = central_mass(ray_accumulate(f.magnitude, f, band, +1, KernelKind::Bilinear), 32, 32);
    r.bwd = central_mass(ray_accumulate(f.magnitude, f, band, -1, KernelKind::Bilinear), 32, 32);
    r.sym = central_mass(acc.v_s, 32, 32);
    return r;
}

void criterion_circle() {
    const auto t0 = std::chrono::steady_clock::now();
    const CircleResult ring = circle_experiment(Phantom{Phantom::Kind::Ring, 8.0, 2.0});
    const double dt = seconds_since(t0);
    const auto off = [](const CircleDetection& d) {
        return std::max(std::abs(static_cast<double>(d.row) - 32.0), std::abs(static_cast<double>(d.col) - 32.0));
    };
    const bool det_ok = off(ring.det) <= 1.0;
    const bool dir_ok = ring.bwd < 0.2 * ring.fwd;
    const bool sym_ok = ring.sym >= std::max(ring.fwd, ring.bwd);
    report("8", det_ok && dir_ok && sym_ok && dt < 5.0,
           fmt("ring r0=8 in 64x64, band k=1..8: centre (%zu,%zu) vs (32,32) [%s]; backward/forward central 5x5 mass "
               "%.3f/%.3f = %.3f (< 0.2) [%s]; symmetric %.3f >= max %.3f [%s]; %.3f s (< 5 s)",
               ring.det.row, ring.det.col, det_ok ? "ok" : "off", ring.bwd, ring.fwd, ring.bwd / ring.fwd,
               dir_ok ? "ok" : "fail", ring.sym, std::max(ring.fwd, ring.bwd), sym_ok ? "ok" : "fail", dt));

    Phantom disk;
    disk.radius = 8.0;
    const CircleResult d = circle_experiment(disk);
    info("8", fmt("disk r=8 reference: centre (%zu,%zu); backward/forward mass %.3f/%.3f = %.3f; symmetric %.3f. "
                  "On the ring the inner rim gradient points outward, so the backward rays are the ones that converge.",
                  d.det.row, d.det.col, d.bwd, d.fwd, d.fwd > 0 ? d.bwd / d.fwd : 0.0, d.sym));
}

void criterion_determinism() {
    const int saved = workers();
    const auto bc = bench_case(224, 9);
    std::vector<std::uint64_t> acc_sums, slice_sums;
    for (const int n : {1, 2, 4}) {
        set_workers(n);
        acc_sums.push_back(checksum(accumulate(bc.u, bc.grids, KernelKind::Bilinear, {224, 224})));
        slice_sums.push_back(checksum(slice(bc.v, bc.grids, KernelKind::Bilinear, {224, 224})));
    }
    const bool same = std::all_of(acc_sums.begin(), acc_sums.end(), [&](auto s) { return s == acc_sums[0]; }) &&
                      std::all_of(slice_sums.begin(), slice_sums.end(), [&](auto s) { return s == slice_sums[0]; });
    report("9a", same,
           fmt("determinism 224x224, workers 1/2/4: accumulate %016llx %016llx %016llx, slice %016llx %016llx %016llx",
               static_cast<unsigned long long>(acc_sums[0]), static_cast<unsigned long long>(acc_sums[1]),
               static_cast<unsigned long long>(acc_sums[2]), static_cast<unsigned long long>(slice_sums[0]),
               static_cast<unsigned long long>(slice_sums[1]), static_cast<unsigned long long>(slice_sums[2])));

    const auto big = bench_case(512, 10);
    auto timed = [&](int n) {
        set_workers(n);
        double best = 1e30;
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto v = accumulate(big.u, big.grids, KernelKind::Bilinear, {512, 512});
            const auto s = slice(big.v, big.grids, KernelKind::Bilinear, {512, 512});
            best = std::min(best, seconds_since(t0));
            if (v.empty() || s.empty()) std::abort();
        }
        return best;
    };
    const double t1 = timed(1);
    const double t4 = timed(4);
    set_workers(saved);
    const int cores = processors();
    const std::string timing = fmt("512x512 accumulate+slice: 1 worker %.4f s, 4 workers %.4f s, ratio %.3f (<= 0.6)",
                                   t1, t4, t4 / t1);
    if (cores >= 4) {
        report("9b", t4 <= 0.6 * t1, timing);
    } else {
        std::printf("[SKIP] 9b  %s; not assessed: %d processor(s) available, criterion needs a 4-core machine\n",
                    timing.c_str(), cores);
    }
}

void criterion_oracle() {
    Rng rng(11);
    double w_acc = 0.0, w_slice = 0.0, w_gs = 0.0, w_ps = 0.0, w_par = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto kind = t % 2 == 0 ? KernelKind::Bilinear : KernelKind::Nearest;
        const bool periodic = t % 4 >= 2;
        const auto wrap = periodic ? Wrap::Columns : Wrap::None;
        const std::size_t c = 1 + rng.index(2), h = 1 + rng.index(8), w = 1 + rng.index(8);
        const std::size_t th = 1 + rng.index(8), tw = 1 + rng.index(8);
        GridSet grids;
        for (std::size_t k = 0; k < 1 + rng.index(3); ++k) {
            SamplingGrid g{Tensor(1, h, w), Tensor(1, h, w)};
            for (double& v : g.gx.values()) v = rng.uniform(-1.5, static_cast<double>(th) + 0.5);
            for (double& v : g.gy.values()) v = rng.uniform(-1.5, static_cast<double>(tw) + 0.5);
            grids.push_back(std::move(g));
        }
        const auto u = random_tensor(rng, c, h, w, -1.0, 1.0);
        const auto v = random_tensor(rng, c, th, tw, -1.0, 1.0);
        w_acc = std::max(w_acc, max_abs_diff(accumulate(u, grids, kind, {th, tw}, wrap),
                                             oracle::accumulate(u, grids, kind, th, tw, periodic)));
        w_slice = std::max(w_slice, max_abs_diff(slice(v, grids, kind, {h, w}, wrap),
                                                 oracle::slice(v, grids, kind, h, w, periodic)));
        w_gs = std::max(w_gs, max_abs_diff(grid_sample(v, grids[0], kind), oracle::grid_sample(v, grids[0], kind)));

        const std::size_t ih = 2 + rng.index(7), iw = 2 + rng.index(7);
        const auto cfg = PolarConfig::for_image(ih, iw, 2 + rng.index(7), 2 + rng.index(7), t % 3 == 0);
        const auto img = random_tensor(rng, c, ih, iw, -1.0, 1.0);
        w_ps = std::max(w_ps, max_abs_diff(polar_sample(img, cfg, kind), oracle::polar_sample(img, cfg, kind)));
        const auto p = random_tensor(rng, c, cfg.h_r, cfg.w_psi, -1.0, 1.0);
        ParametricSlicer l(ih, iw);
        for (double& x : l.values()) x = rng.uniform(-1.0, 1.0);
        w_par = std::max(w_par, max_abs_diff(parametric_slice(p, l, cfg), oracle::parametric_slice(p, l, cfg)));
    }
    const double worst = std::max({w_acc, w_slice, w_gs, w_ps, w_par});
    report("10", worst < 1e-12,
           fmt("brute-force oracles, 20 instances <= 8x8: accumulate %.1e, slice %.1e, grid_sample %.1e, polar_sample "
               "%.1e, parametric_slice %.1e (< 1e-12)",
               w_acc, w_slice, w_gs, w_ps, w_par));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> criteria{
        criterion_adjoint,  criterion_gradcheck, criterion_mass,        criterion_identity, criterion_rotation,
        criterion_parametric, criterion_roundtrip, criterion_circle, criterion_determinism, criterion_oracle};
    for (const auto& run : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion raised: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%d criterion failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
