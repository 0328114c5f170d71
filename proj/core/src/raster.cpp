#include "adloc/raster.hpp"

#include <cstdio>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "cv_bridge.hpp"

namespace adloc {
namespace {

void check_shape(int width, int height, int channels) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    if (channels != 1 && channels != 3 && channels != 4) {
        throw Error(ErrorCode::InvalidArgument, "raster must have 1, 3 or 4 channels");
    }
}

}  // namespace

Raster::Raster(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    check_shape(width, height, channels);
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    check_shape(width, height, channels);
    if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw Error(ErrorCode::InvalidArgument, "pixel buffer size does not match dimensions");
    }
}

BinaryMask::BinaryMask(int width, int height, bool value)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), value ? 1 : 0) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
    }
}

std::size_t BinaryMask::count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

BinaryMask BinaryMask::operator|(const BinaryMask& other) const {
    if (width_ != other.width_ || height_ != other.height_) {
        throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ");
    }
    BinaryMask out = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= other.bits_[i];
    return out;
}

std::vector<std::uint8_t> encode_png(const Raster& img) {
    cv::Mat m = detail::view(img);
    cv::Mat bgr;
    switch (img.channels()) {
        case 3: cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR); break;
        case 4: cv::cvtColor(m, bgr, cv::COLOR_RGBA2BGRA); break;
        default: bgr = m; break;
    }
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", bgr, out)) {
        throw Error(ErrorCode::IoError, "PNG encoding failed");
    }
    return out;
}

Raster decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw Error(ErrorCode::UndecodableImage, "empty image payload");
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat m;
    try {
        m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception&) {
        m.release();
    }
    if (m.empty() || m.dims != 2) {
        throw Error(ErrorCode::UndecodableImage, "image bytes could not be decoded");
    }
    if (m.depth() != CV_8U) {
        cv::Mat tmp;
        m.convertTo(tmp, CV_8U, m.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
        m = tmp;
    }
    cv::Mat rgb;
    switch (m.channels()) {
        case 1: rgb = m; break;
        case 3: cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB); break;
        case 4: cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGBA); break;
        case 2: cv::cvtColor(m.reshape(1, 0), rgb, cv::COLOR_GRAY2RGB); break;
        default: throw Error(ErrorCode::UndecodableImage, "unsupported channel count");
    }
    return detail::from_mat(rgb);
}

void write_png(const std::filesystem::path& path, const Raster& img) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

Raster read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_image(bytes);
}

Raster mask_to_raster(const BinaryMask& mask) {
    Raster out(mask.width(), mask.height(), 1);
    auto dst = out.pixels();
    auto src = mask.bits();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
    return out;
}

BinaryMask raster_to_mask(const Raster& img) {
    BinaryMask out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            bool on = false;
            for (int c = 0; c < img.channels(); ++c) on = on || img.at(x, y, c) != 0;
            if (on) out.set(x, y);
        }
    }
    return out;
}

std::string content_hash(const Raster& img) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (int v : {img.width(), img.height(), img.channels()}) {
        for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    for (auto b : img.pixels()) mix(b);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Raster to_gray(const Raster& img) {
    if (img.channels() == 1) return img;
    cv::Mat gray;
    cv::cvtColor(detail::view(img), gray, img.channels() == 4 ? cv::COLOR_RGBA2GRAY : cv::COLOR_RGB2GRAY);
    return detail::from_mat(gray);
}

}  // namespace adloc
