#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dagrid {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Dense C x H x W tensor of doubles, row-major with channels outermost.
///
/// Every value carrier in the library is a Tensor: feature maps, accumulator
/// grids, homogeneous weights, sampling-grid planes and gradients.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
    Tensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> data);

    /// Single-channel tensor from nested rows; all rows must have equal length.
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t c, std::size_t i, std::size_t j) noexcept {
        return data_[(c * height_ + i) * width_ + j];
    }
    double operator()(std::size_t c, std::size_t i, std::size_t j) const noexcept {
        return data_[(c * height_ + i) * width_ + j];
    }

    double& operator[](std::size_t idx) noexcept { return data_[idx]; }
    double operator[](std::size_t idx) const noexcept { return data_[idx]; }

    std::span<double> plane(std::size_t c) noexcept {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    std::span<const double> plane(std::size_t c) const noexcept {
        return {data_.data() + c * plane_size(), plane_size()};
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    bool same_shape(const Tensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }
    bool same_spatial_shape(const Tensor& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool all_finite() const noexcept;
    double sum() const noexcept;
    std::string shape_string() const;

    Tensor& operator+=(const Tensor& rhs);
    Tensor& operator-=(const Tensor& rhs);
    Tensor& operator*=(double s) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

Tensor operator+(Tensor lhs, const Tensor& rhs);
Tensor operator-(Tensor lhs, const Tensor& rhs);
Tensor operator*(double s, Tensor t);

/// Sum of elementwise products. Shapes must match.
double dot(const Tensor& a, const Tensor& b);

/// Largest elementwise |a - b|. Shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Per-cell row and column indices of an H x W image, stored as 1 x H x W tensors.
struct MeshGrids {
    Tensor mx;  // mx(0, i, j) == i
    Tensor my;  // my(0, i, j) == j
};

MeshGrids mesh_grids(std::size_t height, std::size_t width);

/// Mean over the (2r+1)^2 window. Out-of-image taps are skipped and the mean
/// is taken over the in-bounds count, so constants are preserved.
Tensor box_filter(const Tensor& t, std::size_t radius);

/// Separable Gaussian truncated at ceil(3 sigma), normalized to unit sum, with
/// the same border renormalization as box_filter.
Tensor gaussian_filter(const Tensor& t, double sigma);

/// Normalized 1-D Gaussian taps, index 0 is the center; length ceil(3 sigma) + 1.
std::vector<double> gaussian_half_kernel(double sigma);

}  // namespace dagrid
