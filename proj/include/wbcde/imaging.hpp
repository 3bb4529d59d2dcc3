#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wbcde {

struct Ellipse;

/// Integer pixel coordinate. x is the column, y the row; origin top-left.
struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// 8-bit grayscale raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v; }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Boolean mask, row-major. Out-of-bounds reads return false.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    bool at(int x, int y) const noexcept {
        return contains(x, y) && bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::size_t count() const noexcept;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved RGB raster used for annotated output.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Rgb at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, Rgb c) { data_[static_cast<std::size_t>(y) * width_ + x] = c; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> data_;
};

inline constexpr Rgb kMarkerColor{255, 0, 0};

/// Reads a P5 or P2 PGM with maxval 255. Pixel values are not rescaled.
GrayImage load_image(const std::filesystem::path& path);
GrayImage parse_pgm(std::span<const std::uint8_t> bytes);

/// Canonical P5 encoding: "P5\n<w> <h>\n255\n" followed by the raster.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const BinaryImage& img);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);

void save_image(const GrayImage& img, const std::filesystem::path& path);
void save_image(const BinaryImage& img, const std::filesystem::path& path);
void save_image(const RgbImage& img, const std::filesystem::path& path);

/// Mask from a gray image: nonzero pixels are true.
BinaryImage to_binary(const GrayImage& img);
GrayImage to_gray(const BinaryImage& img);

/// RGB copy of `img` with each ellipse perimeter drawn in kMarkerColor.
/// Perimeter points outside the frame are dropped.
RgbImage overlay_ellipses(const GrayImage& img, std::span<const Ellipse> ellipses);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace wbcde
