#include "dagrid/tensor.hpp"

#include <cmath>
#include <sstream>

namespace dagrid {

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width), data_(channels * height * width, fill) {}

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != channels * height * width) {
        throw InvalidArgument("tensor data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string());
    }
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t h = rows.size();
    const std::size_t w = h ? rows.front().size() : 0;
    std::vector<double> data;
    data.reserve(h * w);
    for (const auto& row : rows) {
        if (row.size() != w) throw InvalidArgument("ragged rows in Tensor::from_rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(1, h, w, std::move(data));
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << channels_ << "x" << height_ << "x" << width_;
    return os.str();
}

Tensor& Tensor::operator+=(const Tensor& rhs) {
    if (!same_shape(rhs)) throw InvalidArgument("shape mismatch " + shape_string() + " vs " + rhs.shape_string());
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& rhs) {
    if (!same_shape(rhs)) throw InvalidArgument("shape mismatch " + shape_string() + " vs " + rhs.shape_string());
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
}

Tensor& Tensor::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
Tensor operator*(double s, Tensor t) { return t *= s; }

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw InvalidArgument("dot: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw InvalidArgument("max_abs_diff: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

MeshGrids mesh_grids(std::size_t height, std::size_t width) {
    if (height == 0 || width == 0) throw InvalidArgument("mesh_grids: dimensions must be >= 1");
    MeshGrids g{Tensor(1, height, width), Tensor(1, height, width)};
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            g.mx(0, i, j) = static_cast<double>(i);
            g.my(0, i, j) = static_cast<double>(j);
        }
    }
    return g;
}

namespace {

// Symmetric separable filter; taps[0] is the center weight, taps[d] the weight at offset +-d.
Tensor separable_filter(const Tensor& t, const std::vector<double>& taps) {
    const auto h = static_cast<std::ptrdiff_t>(t.height());
    const auto w = static_cast<std::ptrdiff_t>(t.width());
    const auto r = static_cast<std::ptrdiff_t>(taps.size()) - 1;
    Tensor tmp(t.channels(), t.height(), t.width());
    Tensor out(t.channels(), t.height(), t.width());

    for (std::size_t c = 0; c < t.channels(); ++c) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < h; ++i) {
            for (std::ptrdiff_t j = 0; j < w; ++j) {
                double acc = 0.0, norm = 0.0;
                for (std::ptrdiff_t d = -r; d <= r; ++d) {
                    const std::ptrdiff_t jj = j + d;
                    if (jj < 0 || jj >= w) continue;
                    const double wt = taps[static_cast<std::size_t>(d < 0 ? -d : d)];
                    acc += wt * t(c, i, jj);
                    norm += wt;
                }
                tmp(c, i, j) = acc / norm;
            }
        }
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < h; ++i) {
            for (std::ptrdiff_t j = 0; j < w; ++j) {
                double acc = 0.0, norm = 0.0;
                for (std::ptrdiff_t d = -r; d <= r; ++d) {
                    const std::ptrdiff_t ii = i + d;
                    if (ii < 0 || ii >= h) continue;
                    const double wt = taps[static_cast<std::size_t>(d < 0 ? -d : d)];
                    acc += wt * tmp(c, ii, j);
                    norm += wt;
                }
                out(c, i, j) = acc / norm;
            }
        }
    }
    return out;
}

}  // namespace

Tensor box_filter(const Tensor& t, std::size_t radius) {
    if (radius == 0) return t;
    return separable_filter(t, std::vector<double>(radius + 1, 1.0));
}

std::vector<double> gaussian_half_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("gaussian_filter: sigma must be > 0");
    }
    const auto half = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(half + 1);
    double total = 0.0;
    for (std::size_t d = 0; d <= half; ++d) {
        const double x = static_cast<double>(d);
        k[d] = std::exp(-x * x / (2.0 * sigma * sigma));
        total += d == 0 ? k[d] : 2.0 * k[d];
    }
    for (double& v : k) v /= total;
    return k;
}

Tensor gaussian_filter(const Tensor& t, double sigma) {
    return separable_filter(t, gaussian_half_kernel(sigma));
}

}  // namespace dagrid
