#include "dagrid/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>

namespace dagrid {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t pos() const noexcept { return pos_; }

    // Reads an unsigned decimal token, skipping whitespace and # comments.
    std::uint64_t number(const char* what) {
        skip_space();
        const std::size_t start = pos_;
        std::uint64_t v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > std::numeric_limits<std::uint32_t>::max()) throw ParseError(std::string(what) + " too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= bytes_.size()) throw ParseError(std::string("truncated header, expected ") + what, pos_);
            throw ParseError(std::string("expected ") + what, pos_);
        }
        return v;
    }

    // The single whitespace byte separating a P5 header from its raster.
    void raster_separator() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ParseError("expected whitespace before raster", pos_);
        }
        ++pos_;
    }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint64_t get_le(const std::vector<std::uint8_t>& in, std::size_t pos, int nbytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < nbytes; ++b) v |= static_cast<std::uint64_t>(in[pos + static_cast<std::size_t>(b)]) << (8 * b);
    return v;
}

}  // namespace

Tensor parse_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PNM file", 0);
    const bool ascii = bytes[1] == '2';
    if (!ascii && bytes[1] != '5') {
        throw ParseError(std::string("unsupported magic 'P") + static_cast<char>(bytes[1]) + "', expected P2 or P5", 0);
    }
    PnmHeaderReader hdr(bytes);
    const auto width = hdr.number("width");
    const auto height = hdr.number("height");
    const std::size_t maxval_at = hdr.pos();
    const auto maxval = hdr.number("maxval");
    if (width == 0 || height == 0) throw ParseError("zero image dimension", maxval_at);
    if (maxval == 0 || maxval > 65535) throw ParseError("maxval must be in 1..65535", maxval_at);

    const std::size_t count = width * height;
    std::vector<double> data(count);
    const double scale = static_cast<double>(maxval);
    if (ascii) {
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t at = hdr.pos();
            const auto v = hdr.number("pixel value");
            if (v > maxval) throw ParseError("pixel value exceeds maxval", at);
            data[k] = static_cast<double>(v) / scale;
        }
    } else {
        hdr.raster_separator();
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        const std::size_t start = hdr.pos();
        if (bytes.size() - start < count * bpp) throw ParseError("truncated raster", bytes.size());
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t at = start + k * bpp;
            const unsigned v = bpp == 2 ? (unsigned{bytes[at]} << 8) | bytes[at + 1] : bytes[at];
            if (v > maxval) throw ParseError("pixel value exceeds maxval", at);
            data[k] = static_cast<double>(v) / scale;
        }
    }
    return Tensor(1, height, width, std::move(data));
}

Tensor read_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

std::vector<std::uint8_t> encode_pgm(const Tensor& t, bool normalize) {
    if (t.channels() != 1) throw InvalidArgument("write_pgm: expected a single-channel tensor, got " + t.shape_string());
    if (!t.all_finite()) throw NonFiniteError("write_pgm: tensor contains non-finite values");
    const std::string header = "P5\n" + std::to_string(t.width()) + " " + std::to_string(t.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + t.size());

    double lo = 0.0, hi = 0.0;
    if (normalize && !t.empty()) {
        const auto [mn, mx] = std::minmax_element(t.values().begin(), t.values().end());
        lo = *mn;
        hi = *mx;
    }
    for (double v : t.values()) {
        if (normalize) {
            out.push_back(hi > lo ? to_byte((v - lo) / (hi - lo) * 255.0) : std::uint8_t{128});
        } else {
            out.push_back(to_byte(std::clamp(v, 0.0, 1.0) * 255.0));
        }
    }
    return out;
}

void write_pgm(const Tensor& t, const std::filesystem::path& path, bool normalize) {
    write_file(path, encode_pgm(t, normalize));
}

std::vector<std::uint8_t> encode_dgt(const Tensor& t) {
    if (!t.all_finite()) throw NonFiniteError("write_dgt: tensor contains non-finite values");
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (t.channels() > kMax || t.height() > kMax || t.width() > kMax) throw InvalidArgument("write_dgt: dimension too large");
    std::vector<std::uint8_t> out{'D', 'A', 'G', '1'};
    out.reserve(4 + 4 + 12 + t.size() * 8);
    if (t.channels() == 1) {
        put_u32(out, 2);
    } else {
        put_u32(out, 3);
        put_u32(out, static_cast<std::uint32_t>(t.channels()));
    }
    put_u32(out, static_cast<std::uint32_t>(t.height()));
    put_u32(out, static_cast<std::uint32_t>(t.width()));
    for (double v : t.values()) put_f64(out, v);
    return out;
}

Tensor decode_dgt(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw ParseError("truncated DGT magic", bytes.size());
    if (std::memcmp(bytes.data(), "DAG1", 4) != 0) throw ParseError("bad DGT magic", 0);
    if (bytes.size() < 8) throw ParseError("truncated DGT header", bytes.size());
    const auto ndim = get_le(bytes, 4, 4);
    if (ndim != 2 && ndim != 3) throw ParseError("DGT ndim must be 2 or 3, got " + std::to_string(ndim), 4);
    const std::size_t payload_at = 8 + 4 * ndim;
    if (bytes.size() < payload_at) throw ParseError("truncated DGT dims", bytes.size());

    std::size_t dims[3] = {1, 0, 0};
    std::size_t count = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        const auto v = static_cast<std::size_t>(get_le(bytes, 8 + 4 * d, 4));
        if (v == 0) throw ParseError("DGT dimension is zero", 8 + 4 * d);
        if (count > std::numeric_limits<std::size_t>::max() / 8 / v) throw ParseError("DGT dims overflow", 8 + 4 * d);
        count *= v;
        dims[3 - ndim + d] = v;
    }
    if ((bytes.size() - payload_at) / 8 < count) throw ParseError("truncated DGT payload", bytes.size());
    if (bytes.size() - payload_at != count * 8) throw ParseError("trailing bytes after DGT payload", payload_at + count * 8);

    std::vector<double> data(count);
    for (std::size_t k = 0; k < count; ++k) {
        data[k] = std::bit_cast<double>(get_le(bytes, payload_at + 8 * k, 8));
        if (!std::isfinite(data[k])) throw ParseError("non-finite DGT value", payload_at + 8 * k);
    }
    return Tensor(dims[0], dims[1], dims[2], std::move(data));
}

void write_dgt(const Tensor& t, const std::filesystem::path& path) { write_file(path, encode_dgt(t)); }

Tensor read_dgt(const std::filesystem::path& path) { return decode_dgt(read_file(path)); }

namespace {

class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

Tensor synth(const Phantom& phantom, const SynthOptions& opts) {
    if (opts.height == 0 || opts.width == 0) throw InvalidArgument("synth: image must be at least 1x1");
    if (!(opts.noise_sigma >= 0.0)) throw InvalidArgument("synth: noise sigma must be >= 0");
    const auto [cx, cy] = opts.center.value_or(std::pair{static_cast<double>(opts.height / 2),
                                                          static_cast<double>(opts.width / 2)});
    if (!std::isfinite(cx) || !std::isfinite(cy)) throw InvalidArgument("synth: center must be finite");

    switch (phantom.kind) {
        case Phantom::Kind::Disk:
            if (!(phantom.radius >= 0.0)) throw InvalidArgument("synth: disk radius must be >= 0");
            break;
        case Phantom::Kind::Ring:
            if (!(phantom.radius >= 0.0)) throw InvalidArgument("synth: ring radius must be >= 0");
            if (!(phantom.thickness > 0.0)) throw InvalidArgument("synth: ring thickness must be > 0");
            break;
        case Phantom::Kind::Checker:
            if (phantom.cell == 0) throw InvalidArgument("synth: checker cell must be >= 1");
            break;
        case Phantom::Kind::SmoothBlob:
            if (phantom.sigmas.empty()) throw InvalidArgument("synth: smooth_blob needs at least one sigma");
            for (double s : phantom.sigmas)
                if (!(s > 0.0)) throw InvalidArgument("synth: blob sigmas must be > 0");
            break;
    }

    Tensor t(1, opts.height, opts.width);
    const double nblobs = static_cast<double>(phantom.sigmas.size());
    for (std::size_t i = 0; i < opts.height; ++i) {
        for (std::size_t j = 0; j < opts.width; ++j) {
            const double di = static_cast<double>(i) - cx;
            const double dj = static_cast<double>(j) - cy;
            const double rho = std::sqrt(di * di + dj * dj);
            double v = 0.0;
            switch (phantom.kind) {
                case Phantom::Kind::Disk: v = rho <= phantom.radius ? 1.0 : 0.0; break;
                case Phantom::Kind::Ring: v = std::abs(rho - phantom.radius) <= phantom.thickness / 2.0 ? 1.0 : 0.0; break;
                case Phantom::Kind::Checker: v = static_cast<double>((i / phantom.cell + j / phantom.cell) % 2); break;
                case Phantom::Kind::SmoothBlob:
                    for (std::size_t k = 0; k < phantom.sigmas.size(); ++k) {
                        const double s = phantom.sigmas[k];
                        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / nblobs;
                        const double bi = di - s * std::cos(phi);
                        const double bj = dj - s * std::sin(phi);
                        v += std::exp(-(bi * bi + bj * bj) / (2.0 * s * s)) / nblobs;
                    }
                    break;
            }
            t(0, i, j) = v;
        }
    }

    if (opts.noise_sigma > 0.0) {
        NormalSource noise(opts.seed);
        for (double& v : t.values()) v += opts.noise_sigma * noise.next();
    }
    return t;
}

}  // namespace dagrid
