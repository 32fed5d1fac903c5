#pragma once

// Direct transcriptions of the operator definitions, evaluated by brute force
// over every (source, target) pair. These share nothing with the library
// kernels beyond the Tensor container and exist only to check them.

#include <cmath>
#include <numbers>

#include "dagrid/accumulate.hpp"
#include "dagrid/polar.hpp"

namespace oracle {

using dagrid::GridSet;
using dagrid::KernelKind;
using dagrid::Tensor;

inline double k_plain(KernelKind kind, double g, long long i) {
    if (kind == KernelKind::Nearest) return std::floor(g + 0.5) == static_cast<double>(i) ? 1.0 : 0.0;
    const double d = 1.0 - std::fabs(g - static_cast<double>(i));
    return d > 0.0 ? d : 0.0;
}

// Column kernel on a periodic axis of length w: sum over the images of j.
inline double k_periodic(KernelKind kind, double g, long long j, long long w) {
    const auto t0 = static_cast<long long>(std::floor((g - static_cast<double>(j)) / static_cast<double>(w)));
    double s = 0.0;
    for (long long t = t0 - 2; t <= t0 + 2; ++t) s += k_plain(kind, g, j + t * w);
    return s;
}

inline double k_col(KernelKind kind, double g, long long j, long long w, bool periodic) {
    return periodic ? k_periodic(kind, g, j, w) : k_plain(kind, g, j);
}

inline Tensor accumulate(const Tensor& u, const GridSet& grids, KernelKind kind, std::size_t th, std::size_t tw,
                         bool periodic = false) {
    Tensor v(u.channels(), th, tw);
    for (std::size_t c = 0; c < u.channels(); ++c)
        for (std::size_t i = 0; i < th; ++i)
            for (std::size_t j = 0; j < tw; ++j) {
                double s = 0.0;
                for (const auto& g : grids)
                    for (std::size_t n = 0; n < u.height(); ++n)
                        for (std::size_t m = 0; m < u.width(); ++m)
                            s += u(c, n, m) * k_plain(kind, g.gx(0, n, m), static_cast<long long>(i)) *
                                 k_col(kind, g.gy(0, n, m), static_cast<long long>(j), static_cast<long long>(tw), periodic);
                v(c, i, j) = s;
            }
    return v;
}

inline Tensor slice(const Tensor& v, const GridSet& grids, KernelKind kind, std::size_t h, std::size_t w,
                    bool periodic = false) {
    Tensor u(v.channels(), h, w);
    for (std::size_t c = 0; c < v.channels(); ++c)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                double s = 0.0;
                for (const auto& g : grids)
                    for (std::size_t n = 0; n < v.height(); ++n)
                        for (std::size_t m = 0; m < v.width(); ++m)
                            s += v(c, n, m) * k_plain(kind, g.gx(0, i, j), static_cast<long long>(n)) *
                                 k_col(kind, g.gy(0, i, j), static_cast<long long>(m), static_cast<long long>(v.width()),
                                       periodic);
                u(c, i, j) = s;
            }
    return u;
}

inline Tensor grid_sample(const Tensor& u, const dagrid::SamplingGrid& grid, KernelKind kind) {
    return slice(u, GridSet{grid}, kind, grid.height(), grid.width());
}

// Polar sampling evaluated cell by cell from the inverse map.
inline Tensor polar_sample(const Tensor& u, const dagrid::PolarConfig& cfg, KernelKind kind) {
    Tensor out(u.channels(), cfg.h_r, cfg.w_psi);
    for (std::size_t c = 0; c < u.channels(); ++c)
        for (std::size_t r = 0; r < cfg.h_r; ++r)
            for (std::size_t a = 0; a < cfg.w_psi; ++a) {
                const double theta = static_cast<double>(a) * cfg.s_theta - std::numbers::pi;
                const double rad = static_cast<double>(r) * cfg.s_r;
                const double x = cfg.center_x + rad * std::cos(theta);
                const double y = cfg.center_y + rad * std::sin(theta);
                double s = 0.0;
                for (std::size_t n = 0; n < u.height(); ++n)
                    for (std::size_t m = 0; m < u.width(); ++m)
                        s += u(c, n, m) * k_plain(kind, x, static_cast<long long>(n)) *
                             k_plain(kind, y, static_cast<long long>(m));
                out(c, r, a) = s;
            }
    return out;
}

// Per-pixel 2x2 combination of the four polar cells around floor(gx), floor(gy).
inline Tensor parametric_slice(const Tensor& p, const dagrid::ParametricSlicer& l, const dagrid::PolarConfig& cfg) {
    Tensor out(p.channels(), l.height(), l.width());
    const auto hr = static_cast<long long>(cfg.h_r);
    const auto wp = static_cast<long long>(cfg.w_psi);
    for (std::size_t c = 0; c < p.channels(); ++c)
        for (std::size_t i = 0; i < l.height(); ++i)
            for (std::size_t j = 0; j < l.width(); ++j) {
                const double di = static_cast<double>(i) - cfg.center_x;
                const double dj = static_cast<double>(j) - cfg.center_y;
                const double gx = std::sqrt(di * di + dj * dj) / cfg.s_r;
                const double gy = (std::atan2(dj, di) + std::numbers::pi) / cfg.s_theta;
                const auto pp = static_cast<long long>(std::floor(gx));
                const auto qq = static_cast<long long>(std::floor(gy));
                double s = 0.0;
                for (long long n = pp; n <= pp + 1; ++n)
                    for (long long m = qq; m <= qq + 1; ++m) {
                        long long mm = m;
                        if (cfg.angular_wrap) mm = ((m % wp) + wp) % wp;
                        if (n < 0 || n >= hr || mm < 0 || mm >= wp) continue;
                        s += p(c, static_cast<std::size_t>(n), static_cast<std::size_t>(mm)) *
                             l.at(i, j, static_cast<std::size_t>(n - pp), static_cast<std::size_t>(m - qq));
                    }
                out(c, i, j) = s;
            }
    return out;
}

}  // namespace oracle
