#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dagrid/tensor.hpp"

namespace dagrid {

/// Malformed input file. offset is the byte position where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads a P2 or P5 graymap (maxval <= 65535) as 1 x H x W scaled to [0, 1].
Tensor read_pgm(const std::filesystem::path& path);
Tensor parse_pgm(const std::vector<std::uint8_t>& bytes);

/// Writes an 8-bit P5 graymap. normalize maps [min, max] onto [0, 255]
/// (a constant image becomes 128); otherwise values are clamped to [0, 1].
/// Both round half up.
void write_pgm(const Tensor& t, const std::filesystem::path& path, bool normalize);
std::vector<std::uint8_t> encode_pgm(const Tensor& t, bool normalize);

// DGT layout, all little-endian:
//   "DAG1" | ndim (u32) | dims (ndim x u32) | payload (prod(dims) x f64)
// Single-channel tensors are stored with ndim = 2 (H, W), others with
// ndim = 3 (C, H, W).
void write_dgt(const Tensor& t, const std::filesystem::path& path);
Tensor read_dgt(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_dgt(const Tensor& t);
Tensor decode_dgt(const std::vector<std::uint8_t>& bytes);

/// Synthetic phantom description.
struct Phantom {
    enum class Kind { Disk, Ring, Checker, SmoothBlob };
    Kind kind = Kind::Disk;
    double radius = 8.0;              // disk, ring
    double thickness = 2.0;           // ring
    std::size_t cell = 8;             // checker
    std::vector<double> sigmas{8.0};  // smooth_blob
};

struct SynthOptions {
    std::size_t height = 64;
    std::size_t width = 64;
    /// Defaults to (height / 2, width / 2) in integer division.
    std::optional<std::pair<double, double>> center;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Renders a phantom. disk: 1 where rho <= r; ring: 1 where |rho - r| <= t/2;
/// checker: alternating cells starting with 0; smooth_blob: mean of Gaussians
/// of each sigma, blob k centered sigma_k away from the center at angle
/// 2 pi k / n. Gaussian noise comes from std::mt19937_64 seeded with seed,
/// mapped to uniforms with 53-bit resolution and paired by Box-Muller.
Tensor synth(const Phantom& phantom, const SynthOptions& opts);

}  // namespace dagrid
