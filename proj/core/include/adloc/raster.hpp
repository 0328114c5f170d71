#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adloc {

/// Row-major interleaved 8-bit image. Channel order is gray, RGB or RGBA.
class Raster {
public:
    Raster() = default;
    /// Throws Error(InvalidArgument) for zero dimensions or channels outside {1,3,4}.
    Raster(int width, int height, int channels, std::uint8_t fill = 0);
    Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_;
    }
    std::uint8_t at(int x, int y, int c = 0) const noexcept { return pixels_[offset(x, y) + c]; }
    std::uint8_t& at(int x, int y, int c = 0) noexcept { return pixels_[offset(x, y) + c]; }

    bool same_size(const Raster& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// One flag per pixel, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool value = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool get(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v = true) noexcept { bits_[index(x, y)] = v ? 1 : 0; }

    std::size_t count() const noexcept;
    bool any() const noexcept { return count() > 0; }
    bool matches(const Raster& img) const noexcept {
        return width_ == img.width() && height_ == img.height();
    }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    BinaryMask operator|(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Lossless persistence. PNG pixel data is RGB(A) in memory.
std::vector<std::uint8_t> encode_png(const Raster& img);
/// Throws Error(UndecodableImage) on anything that is not a decodable image.
Raster decode_image(std::span<const std::uint8_t> bytes);
void write_png(const std::filesystem::path& path, const Raster& img);
Raster read_image(const std::filesystem::path& path);

/// Masks persist as single-channel {0,255} images.
Raster mask_to_raster(const BinaryMask& mask);
/// Any non-zero sample becomes a set bit.
BinaryMask raster_to_mask(const Raster& img);

/// 64-bit FNV-1a over dimensions, channel count and pixels, as 16 hex digits.
std::string content_hash(const Raster& img);

/// BT.601 luma; 3/4-channel inputs are treated as RGB(A).
Raster to_gray(const Raster& img);

}  // namespace adloc
