#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dagrid/accumulate.hpp"
#include "dagrid/circular.hpp"
#include "dagrid/io.hpp"
#include "dagrid/parallel.hpp"
#include "dagrid/polar.hpp"
#include "dagrid/suites.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dagrid;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Bad flag values found after parsing; reported as usage errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool has_extension(const fs::path& p, const char* ext) {
    auto e = p.extension().string();
    for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return e == ext;
}

Tensor load_image(const fs::path& p) {
    if (has_extension(p, ".dgt")) return read_dgt(p);
    return read_pgm(p);
}

void save_image(const Tensor& t, const fs::path& p, bool normalize) {
    if (has_extension(p, ".dgt")) {
        write_dgt(t, p);
    } else if (has_extension(p, ".pgm")) {
        if (t.channels() != 1) throw IoError("PGM output needs a single-channel result; use a .dgt path");
        write_pgm(t, p, normalize);
    } else {
        throw UsageError("output '" + p.string() + "' must end in .pgm or .dgt");
    }
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

void write_json_file(const json& j, const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << j.dump() << '\n';
    if (!out) throw IoError("write to '" + p.string() + "' failed");
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError(std::string(what) + ": '" + item + "' is not a count");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw UsageError(std::string(what) + " must not be empty");
    return out;
}

KernelKind kernel_of(const std::string& name) {
    try {
        return parse_kernel(name);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

// Polar flags shared by the polar subcommands.
struct PolarFlags {
    std::size_t hr = 64;
    std::size_t wpsi = 64;
    std::optional<double> s_r;
    std::optional<double> s_theta;
    std::optional<double> center_x;
    std::optional<double> center_y;
    bool cover_corners = false;
    bool no_wrap = false;
    std::string kernel = "bilinear";

    void attach(CLI::App* app) {
        app->add_option("--hr", hr, "radial bins H_r")->capture_default_str();
        app->add_option("--wpsi", wpsi, "angular bins W_psi")->capture_default_str();
        app->add_option("--s-r", s_r, "radial sampling rate (pixels per bin)");
        app->add_option("--s-theta", s_theta, "angular sampling rate (radians per bin)");
        app->add_option("--center-x", center_x, "pole row coordinate");
        app->add_option("--center-y", center_y, "pole column coordinate");
        app->add_flag("--cover-corners", cover_corners, "choose s_r so the image corners are covered");
        app->add_flag("--no-wrap", no_wrap, "disable angular wrap across the 0/2pi seam");
        app->add_option("--kernel", kernel, "nearest or bilinear")->capture_default_str();
    }

    // Checks that do not need the image size.
    void precheck() const {
        if (hr == 0 || wpsi == 0) throw UsageError("--hr and --wpsi must be >= 1");
        if (s_r && !(*s_r > 0.0 && std::isfinite(*s_r))) throw UsageError("--s-r must be > 0");
        if (s_theta && !(*s_theta > 0.0 && std::isfinite(*s_theta))) throw UsageError("--s-theta must be > 0");
        if ((center_x && !std::isfinite(*center_x)) || (center_y && !std::isfinite(*center_y)))
            throw UsageError("--center-x and --center-y must be finite");
        if (!no_wrap && s_theta && *s_theta * static_cast<double>(wpsi) < 2.0 * std::numbers::pi - 1e-9)
            throw UsageError("--s-theta times --wpsi must cover 2 pi when the angle wraps");
        kernel_of(kernel);
    }

    PolarConfig config(std::size_t h, std::size_t w) const {
        try {
            auto cfg = PolarConfig::for_image(h, w, hr, wpsi, cover_corners);
            if (s_r) cfg.s_r = *s_r;
            if (s_theta) cfg.s_theta = *s_theta;
            if (center_x) cfg.center_x = *center_x;
            if (center_y) cfg.center_y = *center_y;
            cfg.angular_wrap = !no_wrap;
            cfg.validate();
            return cfg;
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
    }

    json describe(const PolarConfig& cfg) const {
        return {{"hr", cfg.h_r},           {"wpsi", cfg.w_psi},       {"s_r", cfg.s_r},
                {"s_theta", cfg.s_theta},  {"center_x", cfg.center_x}, {"center_y", cfg.center_y},
                {"angular_wrap", cfg.angular_wrap}, {"kernel", kernel}};
    }
};

struct Metrics {
    double mse = 0.0;
    double psnr = 0.0;
    std::size_t pixels = 0;
};

// Error over the pixels inside the polar radial range, with peak value 1.
Metrics covered_metrics(const Tensor& ref, const Tensor& out, const PolarConfig& cfg) {
    const auto cover = polar_coverage(ref.height(), ref.width(), cfg);
    Metrics m;
    double s = 0.0;
    for (std::size_t c = 0; c < ref.channels(); ++c) {
        for (std::size_t k = 0; k < ref.plane_size(); ++k) {
            if (!cover[k]) continue;
            const double d = out.plane(c)[k] - ref.plane(c)[k];
            s += d * d;
            ++m.pixels;
        }
    }
    m.mse = m.pixels ? s / static_cast<double>(m.pixels) : 0.0;
    m.psnr = m.mse > 0.0 ? 10.0 * std::log10(1.0 / m.mse) : std::numeric_limits<double>::infinity();
    return m;
}

json metrics_json(const Metrics& m) {
    json j = {{"mse", m.mse}, {"pixels", m.pixels}};
    j["psnr"] = std::isfinite(m.psnr) ? json(m.psnr) : json(nullptr);
    return j;
}

struct RoundTripArgs {
    std::string in, out, metrics_out, filter;
    bool normalize = false;
    PolarFlags polar;
};

int run_roundtrip(const RoundTripArgs& a, const char* name) {
    FilterSpec filter;
    try {
        filter = FilterSpec::parse(a.filter);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    a.polar.precheck();
    const auto kind = kernel_of(a.polar.kernel);
    const Tensor u = load_image(a.in);
    const auto cfg = a.polar.config(u.height(), u.width());
    const Tensor out = polar_roundtrip_filter(u, cfg, kind, filter);
    if (!a.out.empty()) save_image(out, a.out, a.normalize);
    const Metrics m = covered_metrics(u, out, cfg);
    if (!a.metrics_out.empty()) write_json_file({{"mse", m.mse}, {"psnr", metrics_json(m)["psnr"]}}, a.metrics_out);
    json j = {{"command", name}, {"filter", filter.to_string()}, {"polar", a.polar.describe(cfg)}};
    j.update(metrics_json(m));
    emit(j);
    return 0;
}

struct SampleArgs {
    std::string in, out, mode = "sample";
    bool normalize = false;
    PolarFlags polar;
};

int run_sample(const SampleArgs& a) {
    if (a.mode != "sample" && a.mode != "accumulate") throw UsageError("--mode must be sample or accumulate");
    a.polar.precheck();
    const auto kind = kernel_of(a.polar.kernel);
    const Tensor u = load_image(a.in);
    const auto cfg = a.polar.config(u.height(), u.width());
    Tensor p = a.mode == "sample" ? polar_sample(u, cfg, kind) : polar_accumulate(u, cfg, kind).values;
    if (!a.out.empty()) save_image(p, a.out, a.normalize);
    emit({{"command", "polar-sample"},
          {"mode", a.mode},
          {"polar", a.polar.describe(cfg)},
          {"shape", {p.channels(), p.height(), p.width()}},
          {"sum", p.sum()},
          {"checksum", hex(checksum(p))}});
    return 0;
}

struct CircleArgs {
    std::string in, out_vs;
    std::optional<double> ring, disk;
    double thickness = 2.0;
    std::size_t size = 64;
    std::string radii = "15,10,5";
    std::string symmetric = "true";
    std::optional<std::size_t> band;
    std::string kernel = "bilinear";
    double epsilon = kDefaultEpsilon;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

int run_circle(const CircleArgs& a) {
    const int sources = (a.in.empty() ? 0 : 1) + (a.ring ? 1 : 0) + (a.disk ? 1 : 0);
    if (sources != 1) throw UsageError("give exactly one of --in, --ring, --disk");
    if (a.symmetric != "true" && a.symmetric != "false") throw UsageError("--symmetric must be true or false");
    CircularConfig cfg;
    cfg.radii = parse_list(a.radii, "--radii");
    cfg.symmetric = a.symmetric == "true";
    cfg.kernel = kernel_of(a.kernel);
    cfg.epsilon = a.epsilon;
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (a.band && *a.band >= cfg.radii.size()) throw UsageError("--band must index one of the radius bands");

    Tensor u;
    if (!a.in.empty()) {
        u = load_image(a.in);
    } else {
        if (a.size == 0) throw UsageError("--size must be >= 1");
        Phantom ph;
        ph.kind = a.ring ? Phantom::Kind::Ring : Phantom::Kind::Disk;
        ph.radius = a.ring ? *a.ring : *a.disk;
        ph.thickness = a.thickness;
        try {
            u = synth(ph, {a.size, a.size, std::nullopt, a.noise, a.seed});
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
    }
    const auto field = sobel_gradient_field(u, cfg.epsilon);
    const auto acc = circular_accumulate(u, field, cfg);
    const auto det = detect_circle_center(acc, a.band);
    if (!a.out_vs.empty()) save_image(a.band ? acc.per_band[*a.band].v_s : acc.v_s, a.out_vs, true);

    json bands = json::array();
    for (const auto& b : cfg.bands()) bands.push_back({b.lo + 1, b.hi});
    emit({{"command", "circle-detect"},
          {"center", {det.row, det.col}},
          {"score", det.score},
          {"band", a.band ? json(*a.band) : json(nullptr)},
          {"bands", bands},
          {"symmetric", cfg.symmetric}});
    return 0;
}

struct GradArgs {
    std::string op = "all";
    std::string kernel = "bilinear";
    std::size_t trials = 20;
    double tol = 1e-6;
    double step = kDefaultStep;
    double margin = 0.05;
    std::uint64_t seed = 1;
};

int run_gradcheck(const GradArgs& a) {
    std::vector<std::string> ops;
    if (a.op == "all") {
        ops = gradcheck_ops();
    } else {
        const auto& known = gradcheck_ops();
        if (std::find(known.begin(), known.end(), a.op) == known.end()) throw UsageError("unknown --op '" + a.op + "'");
        ops.push_back(a.op);
    }
    if (a.trials == 0) throw UsageError("--trials must be >= 1");
    if (!(a.tol > 0.0) || !(a.step > 0.0)) throw UsageError("--tol and --step must be > 0");
    if (!(a.margin >= 0.0 && a.margin < 0.5)) throw UsageError("--margin must be in [0, 0.5)");

    GradSuiteOptions opts;
    opts.trials = a.trials;
    opts.tol = a.tol;
    opts.step = a.step;
    opts.margin = a.margin;
    opts.seed = a.seed;
    opts.kernel = kernel_of(a.kernel);

    bool all_pass = true;
    double worst = 0.0;
    json results = json::array();
    for (const auto& op : ops) {
        std::map<std::string, std::pair<double, bool>> per_output;
        for (const auto& r : gradcheck_suite(op, opts)) {
            auto& slot = per_output.try_emplace(r.op, 0.0, true).first->second;
            slot.first = std::max(slot.first, r.max_rel_err);
            slot.second = slot.second && r.passed;
        }
        for (const auto& [name, v] : per_output) {
            results.push_back({{"op", name}, {"max_rel_err", v.first}, {"passed", v.second}});
            all_pass = all_pass && v.second;
            worst = std::max(worst, v.first);
            if (!v.second) std::cerr << "gradcheck: " << name << " max rel err " << v.first << " exceeds " << a.tol << '\n';
        }
    }
    emit({{"command", "gradcheck"},
          {"kernel", a.kernel},
          {"trials", a.trials},
          {"tol", a.tol},
          {"step", a.step},
          {"seed", a.seed},
          {"max_rel_err", worst},
          {"passed", all_pass},
          {"results", results}});
    return all_pass ? 0 : kExitRuntime;
}

int run_adjoint(std::size_t instances, std::uint64_t seed, double tol) {
    if (instances == 0) throw UsageError("--instances must be >= 1");
    const auto rep = adjoint_suite(instances, seed);
    const bool ok = rep.max_rel_err < tol;
    if (!ok) std::cerr << "adjoint-suite: max rel err " << rep.max_rel_err << " exceeds " << tol << '\n';
    emit({{"command", "adjoint-suite"},
          {"instances", rep.instances},
          {"seed", seed},
          {"max_rel_err", rep.max_rel_err},
          {"tol", tol},
          {"passed", ok}});
    return ok ? 0 : kExitRuntime;
}

int run_bench(const std::string& sizes_text, const std::string& workers_text, std::size_t reps, std::uint64_t seed) {
    const auto sizes = parse_list(sizes_text, "--sizes");
    const auto counts = parse_list(workers_text, "--workers");
    if (reps == 0) throw UsageError("--reps must be >= 1");
    for (auto n : counts)
        if (n == 0) throw UsageError("--workers entries must be >= 1");
    for (auto n : sizes)
        if (n == 0) throw UsageError("--sizes entries must be >= 1");

    const int saved = workers();
    bool consistent = true;
    json rows = json::array();
    for (const std::size_t size : sizes) {
        const auto bc = bench_case(size, seed);
        std::optional<std::uint64_t> ref_acc, ref_slice;
        double base_acc = 0.0, base_slice = 0.0;
        for (const std::size_t n : counts) {
            set_workers(static_cast<int>(n));
            double t_acc = 1e300, t_slice = 1e300;
            std::uint64_t c_acc = 0, c_slice = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                auto t0 = std::chrono::steady_clock::now();
                const Tensor v = accumulate(bc.u, bc.grids, KernelKind::Bilinear, {size, size});
                t_acc = std::min(t_acc, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                t0 = std::chrono::steady_clock::now();
                const Tensor s = slice(bc.v, bc.grids, KernelKind::Bilinear, {size, size});
                t_slice = std::min(t_slice, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                c_acc = checksum(v);
                c_slice = checksum(s);
            }
            if (!ref_acc) {
                ref_acc = c_acc;
                ref_slice = c_slice;
                base_acc = t_acc;
                base_slice = t_slice;
            }
            const bool same = c_acc == *ref_acc && c_slice == *ref_slice;
            if (!same) std::cerr << "bench: checksum mismatch at size " << size << " with " << n << " workers\n";
            consistent = consistent && same;
            rows.push_back({{"size", size},
                            {"workers", n},
                            {"accumulate_seconds", t_acc},
                            {"slice_seconds", t_slice},
                            {"accumulate_speedup", base_acc / t_acc},
                            {"slice_speedup", base_slice / t_slice},
                            {"accumulate_checksum", hex(c_acc)},
                            {"slice_checksum", hex(c_slice)}});
        }
    }
    set_workers(saved);
    emit({{"command", "bench"},
          {"processors", processors()},
          {"reps", reps},
          {"results", rows},
          {"checksums_equal", consistent}});
    return consistent ? 0 : kExitRuntime;
}

struct SynthArgs {
    std::string kind = "disk";
    double radius = 8.0;
    double thickness = 2.0;
    std::size_t cell = 8;
    std::string sigmas = "8";
    std::size_t height = 64;
    std::size_t width = 64;
    std::optional<std::size_t> size;
    std::vector<double> center;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    bool normalize = false;
};

int run_synth(const SynthArgs& a) {
    Phantom ph;
    if (a.kind == "disk") {
        ph.kind = Phantom::Kind::Disk;
    } else if (a.kind == "ring") {
        ph.kind = Phantom::Kind::Ring;
    } else if (a.kind == "checker") {
        ph.kind = Phantom::Kind::Checker;
    } else if (a.kind == "smooth_blob") {
        ph.kind = Phantom::Kind::SmoothBlob;
    } else {
        throw UsageError("--kind must be disk, ring, checker or smooth_blob");
    }
    ph.radius = a.radius;
    ph.thickness = a.thickness;
    ph.cell = a.cell;
    ph.sigmas.clear();
    std::stringstream ss(a.sigmas);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            ph.sigmas.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--sigmas: '" + item + "' is not a number");
        }
    }
    SynthOptions o;
    o.height = a.size.value_or(a.height);
    o.width = a.size.value_or(a.width);
    if (!a.center.empty()) {
        if (a.center.size() != 2) throw UsageError("--center takes row,col");
        o.center = std::pair{a.center[0], a.center[1]};
    }
    o.noise_sigma = a.noise;
    o.seed = a.seed;
    Tensor t;
    try {
        t = synth(ph, o);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    save_image(t, a.out, a.normalize);
    emit({{"command", "synth"},
          {"kind", a.kind},
          {"shape", {t.height(), t.width()}},
          {"sum", t.sum()},
          {"checksum", hex(checksum(t))},
          {"out", a.out}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dagrid: directed accumulation grids"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "help for every subcommand");

    int threads = 0;
    if (const char* env = std::getenv("DAGRID_THREADS")) {
        try {
            threads = std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "dagrid: DAGRID_THREADS='" << env << "' is not an integer\n";
            return kExitUsage;
        }
    }
    app.add_option("--threads", threads, "worker count (default: DAGRID_THREADS or all cores)");

    RoundTripArgs rt;
    rt.filter = "none";
    auto* c_rt = app.add_subcommand("polar-roundtrip", "polar accumulate, filter, slice back");
    c_rt->add_option("--in", rt.in, "input .pgm or .dgt")->required();
    c_rt->add_option("--out", rt.out, "output .pgm or .dgt");
    c_rt->add_option("--metrics-out", rt.metrics_out, "write {\"mse\", \"psnr\"} JSON here");
    c_rt->add_option("--filter", rt.filter, "none, box:<r> or gaussian:<sigma>")->capture_default_str();
    c_rt->add_flag("--normalize", rt.normalize, "stretch PGM output to [0, 255]");
    rt.polar.attach(c_rt);

    RoundTripArgs pf;
    pf.filter = "box:1";
    auto* c_pf = app.add_subcommand("polar-filter", "smooth in polar space and slice back");
    c_pf->add_option("--in", pf.in, "input .pgm or .dgt")->required();
    c_pf->add_option("--out", pf.out, "output .pgm or .dgt")->required();
    c_pf->add_option("--metrics-out", pf.metrics_out, "write {\"mse\", \"psnr\"} JSON here");
    c_pf->add_option("--filter", pf.filter, "box:<r> or gaussian:<sigma>")->capture_default_str();
    c_pf->add_flag("--normalize", pf.normalize, "stretch PGM output to [0, 255]");
    pf.polar.attach(c_pf);

    SampleArgs ps;
    auto* c_ps = app.add_subcommand("polar-sample", "resample an image onto the polar grid");
    c_ps->add_option("--in", ps.in, "input .pgm or .dgt")->required();
    c_ps->add_option("--out", ps.out, "output .pgm or .dgt");
    c_ps->add_option("--mode", ps.mode, "sample (gather) or accumulate (normalized scatter)")->capture_default_str();
    c_ps->add_flag("--normalize", ps.normalize, "stretch PGM output to [0, 255]");
    ps.polar.attach(c_ps);

    CircleArgs cd;
    auto* c_cd = app.add_subcommand("circle-detect", "circular accumulation and centre detection");
    c_cd->add_option("--in", cd.in, "input .pgm or .dgt");
    c_cd->add_option("--ring", cd.ring, "synthesize a ring phantom of this radius");
    c_cd->add_option("--disk", cd.disk, "synthesize a disk phantom of this radius");
    c_cd->add_option("--thickness", cd.thickness, "ring thickness")->capture_default_str();
    c_cd->add_option("--size", cd.size, "phantom side length")->capture_default_str();
    c_cd->add_option("--noise", cd.noise, "phantom noise sigma")->capture_default_str();
    c_cd->add_option("--seed", cd.seed, "phantom noise seed")->capture_default_str();
    c_cd->add_option("--radii", cd.radii, "band radii, strictly decreasing, e.g. 15,10,5")->capture_default_str();
    c_cd->add_option("--symmetric", cd.symmetric, "true or false")->capture_default_str();
    c_cd->add_option("--band", cd.band, "detect on one band (index into --radii)");
    c_cd->add_option("--kernel", cd.kernel, "nearest or bilinear")->capture_default_str();
    c_cd->add_option("--epsilon", cd.epsilon, "unit-vector guard")->capture_default_str();
    c_cd->add_option("--out-vs", cd.out_vs, "write the accumulated magnitude (.pgm or .dgt)");

    GradArgs gc;
    auto* c_gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    c_gc->add_option("--op", gc.op, "operation or 'all'")->capture_default_str();
    c_gc->add_option("--kernel", gc.kernel, "nearest or bilinear")->capture_default_str();
    c_gc->add_option("--trials", gc.trials, "random trials per operation")->capture_default_str();
    c_gc->add_option("--tol", gc.tol, "relative error tolerance")->capture_default_str();
    c_gc->add_option("--step", gc.step, "central difference step")->capture_default_str();
    c_gc->add_option("--margin", gc.margin, "kink avoidance margin")->capture_default_str();
    c_gc->add_option("--seed", gc.seed, "random seed")->capture_default_str();

    std::size_t adj_instances = 100;
    std::uint64_t adj_seed = 1;
    double adj_tol = 1e-10;
    auto* c_adj = app.add_subcommand("adjoint-suite", "inner-product test of accumulate against slice");
    c_adj->add_option("--instances", adj_instances, "random instances")->capture_default_str();
    c_adj->add_option("--seed", adj_seed, "random seed")->capture_default_str();
    c_adj->add_option("--tol", adj_tol, "relative error tolerance")->capture_default_str();

    std::string bench_sizes = "64,224,512", bench_workers = "1,2,4";
    std::size_t bench_reps = 3;
    std::uint64_t bench_seed = 1;
    auto* c_bench = app.add_subcommand("bench", "time accumulate/slice and compare checksums across worker counts");
    c_bench->add_option("--sizes", bench_sizes, "square image sizes")->capture_default_str();
    c_bench->add_option("--workers", bench_workers, "worker counts")->capture_default_str();
    c_bench->add_option("--reps", bench_reps, "repetitions (best time kept)")->capture_default_str();
    c_bench->add_option("--seed", bench_seed, "workload seed")->capture_default_str();

    SynthArgs sy;
    auto* c_sy = app.add_subcommand("synth", "write a synthetic phantom");
    c_sy->add_option("--kind", sy.kind, "disk, ring, checker or smooth_blob")->capture_default_str();
    c_sy->add_option("--radius", sy.radius, "disk or ring radius")->capture_default_str();
    c_sy->add_option("--thickness", sy.thickness, "ring thickness")->capture_default_str();
    c_sy->add_option("--cell", sy.cell, "checker cell size")->capture_default_str();
    c_sy->add_option("--sigmas", sy.sigmas, "smooth_blob sigmas, comma separated")->capture_default_str();
    c_sy->add_option("--height", sy.height, "rows")->capture_default_str();
    c_sy->add_option("--width", sy.width, "columns")->capture_default_str();
    c_sy->add_option("--size", sy.size, "rows and columns");
    c_sy->add_option("--center", sy.center, "row,col")->delimiter(',');
    c_sy->add_option("--noise", sy.noise, "Gaussian noise sigma")->capture_default_str();
    c_sy->add_option("--seed", sy.seed, "noise seed")->capture_default_str();
    c_sy->add_option("--out", sy.out, "output .pgm or .dgt")->required();
    c_sy->add_flag("--normalize", sy.normalize, "stretch PGM output to [0, 255]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (threads < 0) throw UsageError("--threads must be >= 0");
        if (threads > 0) set_workers(threads);

        if (c_rt->parsed()) return run_roundtrip(rt, "polar-roundtrip");
        if (c_pf->parsed()) return run_roundtrip(pf, "polar-filter");
        if (c_ps->parsed()) return run_sample(ps);
        if (c_cd->parsed()) return run_circle(cd);
        if (c_gc->parsed()) return run_gradcheck(gc);
        if (c_adj->parsed()) return run_adjoint(adj_instances, adj_seed, adj_tol);
        if (c_bench->parsed()) return run_bench(bench_sizes, bench_workers, bench_reps, bench_seed);
        if (c_sy->parsed()) return run_synth(sy);
    } catch (const UsageError& e) {
        std::cerr << "dagrid: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "dagrid: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
