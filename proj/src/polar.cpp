#include "dagrid/polar.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dagrid {

PolarConfig PolarConfig::for_image(std::size_t height, std::size_t width, std::size_t h_r, std::size_t w_psi,
                                   bool cover_corners) {
    if (height == 0 || width == 0) throw InvalidArgument("polar config: image must be at least 1x1");
    if (h_r == 0 || w_psi == 0) throw InvalidArgument("polar config: h_r and w_psi must be >= 1");
    PolarConfig cfg;
    cfg.h_r = h_r;
    cfg.w_psi = w_psi;
    cfg.s_theta = 2.0 * std::numbers::pi / static_cast<double>(w_psi);
    cfg.center_x = (static_cast<double>(height) - 1.0) / 2.0;
    cfg.center_y = (static_cast<double>(width) - 1.0) / 2.0;

    const double bins = h_r > 1 ? static_cast<double>(h_r - 1) : 1.0;
    double reach = static_cast<double>(std::min(height, width)) / 2.0;
    if (cover_corners) {
        reach = std::hypot(static_cast<double>(height) - 1.0, static_cast<double>(width) - 1.0) / 2.0;
    }
    cfg.s_r = reach > 0.0 ? reach / bins : 1.0;
    return cfg;
}

void PolarConfig::validate() const {
    if (!(s_r > 0.0) || !std::isfinite(s_r)) throw InvalidArgument("polar config: s_r must be > 0");
    if (!(s_theta > 0.0) || !std::isfinite(s_theta)) throw InvalidArgument("polar config: s_theta must be > 0");
    if (h_r == 0 || w_psi == 0) throw InvalidArgument("polar config: h_r and w_psi must be >= 1");
    if (!std::isfinite(center_x) || !std::isfinite(center_y)) throw InvalidArgument("polar config: center must be finite");
    if (angular_wrap && s_theta * static_cast<double>(w_psi) < 2.0 * std::numbers::pi - 1e-9) {
        throw InvalidArgument("polar config: with angular wrap, s_theta * w_psi must cover 2 pi");
    }
}

SamplingGrid polar_grid(std::size_t height, std::size_t width, const PolarConfig& cfg) {
    cfg.validate();
    SamplingGrid g{Tensor(1, height, width), Tensor(1, height, width)};
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const double di = static_cast<double>(i) - cfg.center_x;
            const double dj = static_cast<double>(j) - cfg.center_y;
            g.gx(0, i, j) = std::sqrt(di * di + dj * dj) / cfg.s_r;
            g.gy(0, i, j) = (std::atan2(dj, di) + std::numbers::pi) / cfg.s_theta;
        }
    }
    return g;
}

SamplingGrid polar_inverse_grid(const PolarConfig& cfg) {
    cfg.validate();
    SamplingGrid g{Tensor(1, cfg.h_r, cfg.w_psi), Tensor(1, cfg.h_r, cfg.w_psi)};
    for (std::size_t r = 0; r < cfg.h_r; ++r) {
        const double radius = static_cast<double>(r) * cfg.s_r;
        for (std::size_t a = 0; a < cfg.w_psi; ++a) {
            const double theta = static_cast<double>(a) * cfg.s_theta - std::numbers::pi;
            g.gx(0, r, a) = cfg.center_x + radius * std::cos(theta);
            g.gy(0, r, a) = cfg.center_y + radius * std::sin(theta);
        }
    }
    return g;
}

AccumulatorGrid polar_accumulate_raw(const Tensor& u, const PolarConfig& cfg, KernelKind kind) {
    const GridSet grids{polar_grid(u.height(), u.width(), cfg)};
    return accumulate_homogeneous(u, grids, kind, cfg.shape(), cfg.wrap());
}

AccumulatorGrid polar_accumulate(const Tensor& u, const PolarConfig& cfg, KernelKind kind, double epsilon) {
    return normalize(polar_accumulate_raw(u, cfg, kind), epsilon);
}

Tensor polar_sample(const Tensor& u, const PolarConfig& cfg, KernelKind kind) {
    return grid_sample(u, polar_inverse_grid(cfg), kind);
}

Tensor polar_slice(const Tensor& p, const PolarConfig& cfg, KernelKind kind, Shape2 image_shape) {
    if (p.height() != cfg.h_r || p.width() != cfg.w_psi) {
        throw InvalidArgument("polar_slice: tensor " + p.shape_string() + " does not match polar grid " +
                              std::to_string(cfg.h_r) + "x" + std::to_string(cfg.w_psi));
    }
    const GridSet grids{polar_grid(image_shape.height, image_shape.width, cfg)};
    return slice(p, grids, kind, image_shape, cfg.wrap());
}

std::vector<bool> polar_coverage(std::size_t height, std::size_t width, const PolarConfig& cfg) {
    const auto grid = polar_grid(height, width, cfg);
    std::vector<bool> mask(height * width);
    const double last = static_cast<double>(cfg.h_r - 1);
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = grid.gx[k] <= last;
    return mask;
}

ParametricSlicer::ParametricSlicer(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), l_(height * width * 4, fill) {}

ParametricSlicer ParametricSlicer::bilinear(std::size_t height, std::size_t width, const PolarConfig& cfg) {
    const auto grid = polar_grid(height, width, cfg);
    ParametricSlicer s(height, width);
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const double gx = grid.gx(0, i, j);
            const double gy = grid.gy(0, i, j);
            const auto p = static_cast<long long>(std::floor(gx));
            const auto q = static_cast<long long>(std::floor(gy));
            for (std::size_t a = 0; a < 2; ++a) {
                const double wx = kernel_weight(KernelKind::Bilinear, gx, p + static_cast<long long>(a));
                for (std::size_t b = 0; b < 2; ++b) {
                    const double wy = kernel_weight(KernelKind::Bilinear, gy, q + static_cast<long long>(b));
                    s.at(i, j, a, b) = wx * wy;
                }
            }
        }
    }
    return s;
}

namespace {

struct Corner {
    bool valid;
    std::size_t row;
    std::size_t col;
};

// The four polar cells (p + a, q + b) read by pixel coordinates (gx, gy).
std::array<Corner, 4> corners(double gx, double gy, const PolarConfig& cfg) {
    std::array<Corner, 4> out{};
    const auto p = static_cast<long long>(std::floor(gx));
    const auto q = static_cast<long long>(std::floor(gy));
    const auto hr = static_cast<long long>(cfg.h_r);
    const auto wp = static_cast<long long>(cfg.w_psi);
    for (long long a = 0; a < 2; ++a) {
        for (long long b = 0; b < 2; ++b) {
            const long long n = p + a;
            long long m = q + b;
            if (cfg.angular_wrap) {
                m %= wp;
                if (m < 0) m += wp;
            }
            const bool ok = n >= 0 && n < hr && m >= 0 && m < wp;
            out[static_cast<std::size_t>(a * 2 + b)] =
                Corner{ok, ok ? static_cast<std::size_t>(n) : 0, ok ? static_cast<std::size_t>(m) : 0};
        }
    }
    return out;
}

void check_parametric(const Tensor& p, const ParametricSlicer& slicer, const PolarConfig& cfg) {
    cfg.validate();
    if (p.height() != cfg.h_r || p.width() != cfg.w_psi) {
        throw InvalidArgument("parametric_slice: tensor " + p.shape_string() + " does not match polar grid");
    }
    if (slicer.height() == 0 || slicer.width() == 0) throw InvalidArgument("parametric_slice: empty slicer");
}

}  // namespace

Tensor parametric_slice(const Tensor& p, const ParametricSlicer& slicer, const PolarConfig& cfg) {
    check_parametric(p, slicer, cfg);
    const auto grid = polar_grid(slicer.height(), slicer.width(), cfg);
    Tensor out(p.channels(), slicer.height(), slicer.width());
    const auto h = static_cast<std::ptrdiff_t>(slicer.height());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < h; ++si) {
        const auto i = static_cast<std::size_t>(si);
        for (std::size_t j = 0; j < slicer.width(); ++j) {
            const auto cs = corners(grid.gx(0, i, j), grid.gy(0, i, j), cfg);
            for (std::size_t k = 0; k < 4; ++k) {
                if (!cs[k].valid) continue;
                const double l = slicer.at(i, j, k / 2, k % 2);
                for (std::size_t c = 0; c < p.channels(); ++c) out(c, i, j) += p(c, cs[k].row, cs[k].col) * l;
            }
        }
    }
    return out;
}

ParametricSliceGrad parametric_slice_backward(const Tensor& d_u, const Tensor& p, const ParametricSlicer& slicer,
                                              const PolarConfig& cfg) {
    check_parametric(p, slicer, cfg);
    if (d_u.channels() != p.channels() || d_u.height() != slicer.height() || d_u.width() != slicer.width()) {
        throw InvalidArgument("parametric_slice_backward: gradient " + d_u.shape_string() + " has the wrong shape");
    }
    const auto grid = polar_grid(slicer.height(), slicer.width(), cfg);
    ParametricSliceGrad g{Tensor(p.channels(), p.height(), p.width()), ParametricSlicer(slicer.height(), slicer.width())};

    // d_l is per pixel; d_p is a scatter, kept sequential in pixel order.
    for (std::size_t i = 0; i < slicer.height(); ++i) {
        for (std::size_t j = 0; j < slicer.width(); ++j) {
            const auto cs = corners(grid.gx(0, i, j), grid.gy(0, i, j), cfg);
            for (std::size_t k = 0; k < 4; ++k) {
                if (!cs[k].valid) continue;
                const double l = slicer.at(i, j, k / 2, k % 2);
                double dl = 0.0;
                for (std::size_t c = 0; c < p.channels(); ++c) {
                    dl += p(c, cs[k].row, cs[k].col) * d_u(c, i, j);
                    g.d_p(c, cs[k].row, cs[k].col) += d_u(c, i, j) * l;
                }
                g.d_l.at(i, j, k / 2, k % 2) = dl;
            }
        }
    }
    return g;
}

FilterSpec FilterSpec::parse(std::string_view text) {
    if (text == "none") return {};
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InvalidArgument("filter '" + std::string(text) + "' must be none, box:<r> or gaussian:<sigma>");
    }
    const auto name = text.substr(0, colon);
    const auto arg = std::string(text.substr(colon + 1));
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(arg, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != arg.size() || !std::isfinite(value)) {
        throw InvalidArgument("filter parameter '" + arg + "' is not a number");
    }
    if (name == "box") {
        if (value < 0.0 || value != std::floor(value)) throw InvalidArgument("box radius must be a non-negative integer");
        return {Kind::Box, value};
    }
    if (name == "gaussian") {
        if (!(value > 0.0)) throw InvalidArgument("gaussian sigma must be > 0");
        return {Kind::Gaussian, value};
    }
    throw InvalidArgument("unknown filter '" + std::string(name) + "'");
}

std::string FilterSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Box: os << "box:" << static_cast<std::size_t>(param); break;
        case Kind::Gaussian: os << "gaussian:" << param; break;
    }
    return os.str();
}

Tensor FilterSpec::apply(const Tensor& t) const {
    switch (kind) {
        case Kind::Box: return box_filter(t, static_cast<std::size_t>(param));
        case Kind::Gaussian: return gaussian_filter(t, param);
        case Kind::None: break;
    }
    return t;
}

Tensor polar_roundtrip_filter(const Tensor& u, const PolarConfig& cfg, KernelKind kind, const FilterSpec& filter,
                              double epsilon) {
    const auto acc = polar_accumulate(u, cfg, kind, epsilon);
    return polar_slice(filter.apply(acc.values), cfg, kind, {u.height(), u.width()});
}

}  // namespace dagrid
