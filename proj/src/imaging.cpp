#include "wbcde/imaging.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "wbcde/error.hpp"
#include "wbcde/geometry.hpp"
#include "wbcde/raster.hpp"

namespace wbcde {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("pixel count does not match dimensions");
    }
}

BinaryImage::BinaryImage(int width, int height, bool fill)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
}

std::size_t BinaryImage::count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
}

namespace {

// Cursor over a netpbm header: whitespace and '#' comments between tokens.
class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long long read_uint(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw FormatError(std::string("PGM: expected ") + what);
        }
        long long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) throw FormatError(std::string("PGM: ") + what + " too large");
            ++pos_;
        }
        return v;
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance() noexcept { ++pos_; }
    bool at_end() const noexcept { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const { return bytes_[pos_]; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
        throw FormatError("PGM: missing P5/P2 magic");
    }
    const bool binary = bytes[1] == '5';
    HeaderReader rd(bytes.subspan(2));
    const auto width = rd.read_uint("width");
    const auto height = rd.read_uint("height");
    const auto maxval = rd.read_uint("maxval");
    if (width < 1 || height < 1) throw FormatError("PGM: zero dimension");
    if (maxval != 255) throw FormatError("PGM: maxval must be 255, got " + std::to_string(maxval));
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

    std::vector<std::uint8_t> data;
    data.reserve(n);
    if (binary) {
        if (rd.at_end() || !std::isspace(rd.peek())) throw FormatError("PGM: missing raster separator");
        const std::size_t start = 2 + rd.pos() + 1;
        if (bytes.size() - start < n) throw FormatError("PGM: truncated raster");
        data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                    bytes.begin() + static_cast<std::ptrdiff_t>(start + n));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = rd.read_uint("pixel value");
            if (v > 255) throw FormatError("PGM: pixel value exceeds maxval");
            data.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return parse_pgm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

namespace {

std::vector<std::uint8_t> netpbm_header(const char* magic, int w, int h) {
    const std::string hdr = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    return {hdr.begin(), hdr.end()};
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    auto out = netpbm_header("P5", img.width(), img.height());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

std::vector<std::uint8_t> encode_pgm(const BinaryImage& img) {
    auto out = netpbm_header("P5", img.width(), img.height());
    out.reserve(out.size() + static_cast<std::size_t>(img.width()) * img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.push_back(img.at(x, y) ? 255 : 0);
    return out;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
    auto out = netpbm_header("P6", img.width(), img.height());
    out.reserve(out.size() + 3 * static_cast<std::size_t>(img.width()) * img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto c = img.at(x, y);
            out.push_back(c.r);
            out.push_back(c.g);
            out.push_back(c.b);
        }
    }
    return out;
}

void save_image(const GrayImage& img, const std::filesystem::path& path) { write_file(path, encode_pgm(img)); }
void save_image(const BinaryImage& img, const std::filesystem::path& path) { write_file(path, encode_pgm(img)); }
void save_image(const RgbImage& img, const std::filesystem::path& path) { write_file(path, encode_ppm(img)); }

BinaryImage to_binary(const GrayImage& img) {
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, y) != 0);
    return out;
}

GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, y) ? 255 : 0);
    return out;
}

RgbImage overlay_ellipses(const GrayImage& img, std::span<const Ellipse> ellipses) {
    RgbImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto v = img.at(x, y);
            out.set(x, y, {v, v, v});
        }
    }
    const Frame frame{img.width(), img.height()};
    for (const auto& e : ellipses) {
        const auto perimeter = try_rasterize(e, frame);
        if (!perimeter) continue;
        for (const auto& p : perimeter->points) out.set(p.x, p.y, kMarkerColor);
    }
    return out;
}

}  // namespace wbcde
