#include "dagrid/circular.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dagrid {

namespace {

inline std::size_t clamp_index(std::ptrdiff_t idx, std::size_t extent) noexcept {
    if (idx < 0) return 0;
    if (static_cast<std::size_t>(idx) >= extent) return extent - 1;
    return static_cast<std::size_t>(idx);
}

// Smoothing column of the scaled Sobel pair: weights 1, 2, 1 over 8.
constexpr double kSmooth[3] = {1.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0};
constexpr double kDiff[3] = {-1.0, 0.0, 1.0};

// Channel-stacks two single-channel planes.
Tensor stack(const Tensor& a, const Tensor& b) {
    Tensor out(2, a.height(), a.width());
    std::copy(a.values().begin(), a.values().end(), out.plane(0).begin());
    std::copy(b.values().begin(), b.values().end(), out.plane(1).begin());
    return out;
}

Tensor channel(const Tensor& t, std::size_t c) {
    Tensor out(1, t.height(), t.width());
    std::copy(t.plane(c).begin(), t.plane(c).end(), out.values().begin());
    return out;
}

}  // namespace

GradientField sobel_gradient_field(const Tensor& u, double epsilon) {
    if (u.channels() != 1) throw InvalidArgument("sobel_gradient_field: expected a single-channel image, got " + u.shape_string());
    if (u.empty()) throw InvalidArgument("sobel_gradient_field: empty image");
    if (!(epsilon > 0.0)) throw InvalidArgument("sobel_gradient_field: epsilon must be > 0");

    const std::size_t h = u.height();
    const std::size_t w = u.width();
    GradientField f{Tensor(1, h, w), Tensor(1, h, w), Tensor(1, h, w), Tensor(1, h, w), Tensor(1, h, w), epsilon};
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            const auto at = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
                return u(0, clamp_index(static_cast<std::ptrdiff_t>(i) + a, h),
                         clamp_index(static_cast<std::ptrdiff_t>(j) + b, w));
            };
            // Differences first, so flat regions give exactly zero.
            double gx = 0.0, gy = 0.0;
            for (std::ptrdiff_t t = -1; t <= 1; ++t) {
                gx += kSmooth[t + 1] * (at(1, t) - at(-1, t));
                gy += kSmooth[t + 1] * (at(t, 1) - at(t, -1));
            }
            const double s = std::sqrt(gx * gx + gy * gy);
            f.ux(0, i, j) = gx;
            f.uy(0, i, j) = gy;
            f.magnitude(0, i, j) = s;
            f.unit_x(0, i, j) = gx / (s + epsilon);
            f.unit_y(0, i, j) = gy / (s + epsilon);
        }
    }
    return f;
}

Tensor sobel_backward(const Tensor& d_ux, const Tensor& d_uy) {
    if (!d_ux.same_shape(d_uy) || d_ux.channels() != 1) throw InvalidArgument("sobel_backward: shape mismatch");
    const std::size_t h = d_ux.height();
    const std::size_t w = d_ux.width();
    Tensor d_u(1, h, w);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            for (std::ptrdiff_t a = -1; a <= 1; ++a) {
                for (std::ptrdiff_t b = -1; b <= 1; ++b) {
                    d_u(0, clamp_index(static_cast<std::ptrdiff_t>(i) + a, h),
                        clamp_index(static_cast<std::ptrdiff_t>(j) + b, w)) +=
                        kDiff[a + 1] * kSmooth[b + 1] * d_ux(0, i, j) + kSmooth[a + 1] * kDiff[b + 1] * d_uy(0, i, j);
                }
            }
        }
    }
    return d_u;
}

std::pair<Tensor, Tensor> gradient_field_backward(const GradientField& field, const Tensor& d_magnitude,
                                                  const Tensor& d_unit_x, const Tensor& d_unit_y) {
    const double eps = field.epsilon;
    Tensor d_ux(1, field.ux.height(), field.ux.width());
    Tensor d_uy(1, field.ux.height(), field.ux.width());
    for (std::size_t k = 0; k < d_ux.size(); ++k) {
        const double s = field.magnitude[k];
        if (s < 10.0 * eps) continue;
        const double gx = field.ux[k];
        const double gy = field.uy[k];
        const double inv = 1.0 / (s + eps);
        const double cross = 1.0 / (s * (s + eps) * (s + eps));
        d_ux[k] = d_magnitude[k] * gx / s + d_unit_x[k] * (inv - gx * gx * cross) - d_unit_y[k] * gx * gy * cross;
        d_uy[k] = d_magnitude[k] * gy / s + d_unit_y[k] * (inv - gy * gy * cross) - d_unit_x[k] * gx * gy * cross;
    }
    return {std::move(d_ux), std::move(d_uy)};
}

SamplingGrid circular_grid(const GradientField& field, double k) {
    auto grid = SamplingGrid::identity(field.unit_x.height(), field.unit_x.width());
    for (std::size_t idx = 0; idx < grid.gx.size(); ++idx) {
        grid.gx[idx] += k * field.unit_x[idx];
        grid.gy[idx] += k * field.unit_y[idx];
    }
    return grid;
}

CircularGrids circular_grids(const GradientField& field, std::size_t radii_max) {
    if (radii_max == 0) throw InvalidArgument("circular_grids: N must be >= 1");
    CircularGrids g;
    g.forward.reserve(radii_max);
    g.backward.reserve(radii_max);
    for (std::size_t k = 1; k <= radii_max; ++k) {
        g.forward.push_back(circular_grid(field, static_cast<double>(k)));
        g.backward.push_back(circular_grid(field, -static_cast<double>(k)));
    }
    return g;
}

std::vector<RadiusBand> CircularConfig::bands() const {
    validate();
    std::vector<RadiusBand> out;
    for (std::size_t b = 0; b < radii.size(); ++b) {
        out.push_back({b + 1 < radii.size() ? radii[b + 1] : 0, radii[b]});
    }
    return out;
}

void CircularConfig::validate() const {
    if (radii.empty()) throw InvalidArgument("circular config: radii must be non-empty");
    for (std::size_t b = 0; b < radii.size(); ++b) {
        if (radii[b] == 0) throw InvalidArgument("circular config: radii must be >= 1");
        if (b > 0 && radii[b] >= radii[b - 1]) throw InvalidArgument("circular config: band radii must strictly decrease");
    }
    if (!(epsilon > 0.0)) throw InvalidArgument("circular config: epsilon must be > 0");
}

namespace {

void check_field(const Tensor& u, const GradientField& field) {
    if (u.channels() != 1) throw InvalidArgument("circular accumulation expects a single-channel image");
    if (!u.same_spatial_shape(field.magnitude)) {
        throw InvalidArgument("image " + u.shape_string() + " does not match gradient field " +
                              field.magnitude.shape_string());
    }
}

Tensor ray_term(const Tensor& x, const GradientField& field, double k, KernelKind kind) {
    return accumulate(x, GridSet{circular_grid(field, k)}, kind, {x.height(), x.width()});
}

}  // namespace

Tensor ray_accumulate(const Tensor& x, const GradientField& field, RadiusBand band, int direction, KernelKind kind) {
    if (!x.same_spatial_shape(field.magnitude)) throw InvalidArgument("ray_accumulate: shape mismatch");
    if (direction != 1 && direction != -1) throw InvalidArgument("ray_accumulate: direction must be +1 or -1");
    Tensor out(x.channels(), x.height(), x.width());
    for (std::size_t k = band.lo + 1; k <= band.hi; ++k) {
        out += ray_term(x, field, direction * static_cast<double>(k), kind);
    }
    return out;
}

CircularAccumulation circular_accumulate(const Tensor& u, const GradientField& field, const CircularConfig& cfg) {
    check_field(u, field);
    const auto bands = cfg.bands();
    const Tensor source = stack(field.magnitude, u);  // channel 0: S, channel 1: U

    // Per-radius terms are added in increasing k, both into the total and
    // into the band that owns k.
    std::vector<Tensor> fwd_band(bands.size(), Tensor(2, u.height(), u.width()));
    std::vector<Tensor> bwd_band(bands.size(), Tensor(2, u.height(), u.width()));
    Tensor fwd(2, u.height(), u.width());
    Tensor bwd(2, u.height(), u.width());
    for (std::size_t b = bands.size(); b-- > 0;) {
        for (std::size_t k = bands[b].lo + 1; k <= bands[b].hi; ++k) {
            const Tensor f = ray_term(source, field, static_cast<double>(k), cfg.kernel);
            fwd += f;
            fwd_band[b] += f;
            if (cfg.symmetric) {
                const Tensor r = ray_term(source, field, -static_cast<double>(k), cfg.kernel);
                bwd += r;
                bwd_band[b] += r;
            }
        }
    }

    CircularAccumulation out;
    const Tensor total = cfg.symmetric ? fwd - bwd : fwd;
    out.v_s = channel(total, 0);
    out.v_u = channel(total, 1);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        const Tensor t = cfg.symmetric ? fwd_band[b] - bwd_band[b] : fwd_band[b];
        out.per_band.push_back({channel(t, 0), channel(t, 1)});
    }
    return out;
}

CircularGrad circular_backward(const Tensor& d_vs, const Tensor& d_vu, const Tensor& u, const GradientField& field,
                               const CircularConfig& cfg) {
    check_field(u, field);
    if (!d_vs.same_shape(u) || !d_vu.same_shape(u)) throw InvalidArgument("circular_backward: gradient shape mismatch");
    const std::size_t n_max = cfg.bands().front().hi;
    const Tensor source = stack(field.magnitude, u);
    const Tensor upstream = stack(d_vs, d_vu);
    const Shape2 shape{u.height(), u.width()};
    const bool track_grids = cfg.kernel == KernelKind::Bilinear;

    Tensor d_src(2, u.height(), u.width());
    CircularGrad g{Tensor(1, u.height(), u.width()), Tensor(1, u.height(), u.width()), Tensor(1, u.height(), u.width()),
                   Tensor(1, u.height(), u.width())};
    for (std::size_t k = 1; k <= n_max; ++k) {
        const double kd = static_cast<double>(k);
        const GridSet fwd{circular_grid(field, kd)};
        d_src += accumulate_backward_input(upstream, fwd, cfg.kernel, shape);
        if (track_grids) {
            const auto gg = accumulate_backward_grid(upstream, source, fwd, cfg.kernel);
            g.d_unit_x += kd * gg[0].gx;
            g.d_unit_y += kd * gg[0].gy;
        }
        if (cfg.symmetric) {
            const GridSet bwd{circular_grid(field, -kd)};
            d_src -= accumulate_backward_input(upstream, bwd, cfg.kernel, shape);
            if (track_grids) {
                // The backward term enters with a minus sign and its grid
                // moves with -k, so the two signs cancel.
                const auto gg = accumulate_backward_grid(upstream, source, bwd, cfg.kernel);
                g.d_unit_x += kd * gg[0].gx;
                g.d_unit_y += kd * gg[0].gy;
            }
        }
    }
    g.d_magnitude = channel(d_src, 0);
    g.d_u = channel(d_src, 1);
    return g;
}

CircleDetection detect_circle_center(const CircularAccumulation& acc, std::optional<std::size_t> band) {
    const Tensor* vs = &acc.v_s;
    if (band) {
        if (*band >= acc.per_band.size()) {
            throw InvalidArgument("detect_circle_center: band " + std::to_string(*band) + " out of range");
        }
        vs = &acc.per_band[*band].v_s;
    }
    if (vs->empty()) throw InvalidArgument("detect_circle_center: empty accumulation");

    const auto h = static_cast<std::ptrdiff_t>(vs->height());
    const auto w = static_cast<std::ptrdiff_t>(vs->width());
    CircleDetection best;
    bool first = true;
    for (std::ptrdiff_t i = 0; i < h; ++i) {
        for (std::ptrdiff_t j = 0; j < w; ++j) {
            double s = 0.0;
            for (std::ptrdiff_t a = i - 1; a <= i + 1; ++a) {
                for (std::ptrdiff_t b = j - 1; b <= j + 1; ++b) {
                    if (a >= 0 && a < h && b >= 0 && b < w) s += (*vs)(0, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                }
            }
            s /= 9.0;
            // Row-major scan with a strict comparison keeps the smallest (row, col) on ties.
            if (first || s > best.score) {
                best = {static_cast<std::size_t>(i), static_cast<std::size_t>(j), s};
                first = false;
            }
        }
    }
    return best;
}

}  // namespace dagrid
