#include "adloc/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "cv_bridge.hpp"

namespace adloc::imaging {

int otsu_threshold(std::span<const std::uint64_t, 256> histogram) {
    double total = 0.0, weighted = 0.0;
    int first_nonzero = -1;
    for (int i = 0; i < 256; ++i) {
        const auto n = static_cast<double>(histogram[i]);
        total += n;
        weighted += n * i;
        if (first_nonzero < 0 && histogram[i] > 0) first_nonzero = i;
    }
    if (total == 0.0) return 0;

    int best_t = first_nonzero;
    double best_var = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        w0 += static_cast<double>(histogram[t]);
        sum0 += static_cast<double>(histogram[t]) * t;
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (weighted - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

Raster binarize_otsu(const Raster& gray) {
    if (gray.channels() != 1) throw Error(ErrorCode::InvalidArgument, "binarize_otsu expects one channel");
    std::array<std::uint64_t, 256> hist{};
    for (auto v : gray.pixels()) ++hist[v];
    const int t = otsu_threshold(hist);
    Raster out(gray.width(), gray.height(), 1);
    auto src = gray.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > t ? 255 : 0;
    return out;
}

Raster preprocess_for_detection(const Raster& img, const PreprocessParams& params) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    cv::Mat src = detail::view(img);
    if (img.channels() == 4) {
        cv::Mat rgb;
        cv::cvtColor(src, rgb, cv::COLOR_RGBA2RGB);
        src = rgb;
    }

    cv::Mat despeckled;
    cv::medianBlur(src, despeckled, params.median_kernel);

    cv::Mat gray;
    if (despeckled.channels() == 3) {
        cv::cvtColor(despeckled, gray, cv::COLOR_RGB2GRAY);
    } else {
        gray = despeckled;
    }

    cv::Mat enhanced;
    auto clahe = cv::createCLAHE(params.clahe_clip_limit,
                                 cv::Size(params.clahe_tile_grid, params.clahe_tile_grid));
    clahe->apply(gray, enhanced);

    Raster binary = binarize_otsu(detail::from_mat(enhanced));

    const int longest = std::max(binary.width(), binary.height());
    if (longest == params.max_side) return binary;
    const double k = static_cast<double>(params.max_side) / longest;
    const int w = std::max(1, static_cast<int>(std::lround(binary.width() * k)));
    const int h = std::max(1, static_cast<int>(std::lround(binary.height() * k)));
    cv::Mat resized;
    cv::resize(detail::view(binary), resized, cv::Size(w, h), 0, 0, cv::INTER_NEAREST);
    return detail::from_mat(resized);
}

namespace {

LetterboxTransform plan_letterbox(int w, int h, int target_side) {
    if (target_side < 16) throw Error(ErrorCode::InvalidArgument, "letterbox target side must be >= 16");
    LetterboxTransform t;
    t.original_w = w;
    t.original_h = h;
    t.target_side = target_side;
    const int diff = std::abs(w - h);
    if (w > h) {
        t.pad_top = diff / 2;
        t.pad_bottom = diff - t.pad_top;
    } else {
        t.pad_left = diff / 2;
        t.pad_right = diff - t.pad_left;
    }
    t.scale = static_cast<double>(target_side) / std::max(w, h);
    return t;
}

}  // namespace

Letterboxed letterbox(const Raster& img, int target_side) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    LetterboxTransform t = plan_letterbox(img.width(), img.height(), target_side);

    const int side = t.padded_side();
    Raster padded(side, side, img.channels(), kLetterboxFill);
    if (img.channels() == 4) {
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) padded.at(x, y, 3) = 255;
    }
    const auto row_bytes = static_cast<std::size_t>(img.width()) * img.channels();
    for (int y = 0; y < img.height(); ++y) {
        std::copy_n(img.pixels().begin() + img.offset(0, y), row_bytes,
                    padded.pixels().begin() + padded.offset(t.pad_left, y + t.pad_top));
    }

    if (side == target_side) return {std::move(padded), t};
    cv::Mat scaled;
    cv::resize(detail::view(padded), scaled, cv::Size(target_side, target_side), 0, 0, cv::INTER_LINEAR);
    return {detail::from_mat(scaled), t};
}

BinaryMask letterbox_mask(const BinaryMask& mask, const LetterboxTransform& t) {
    if (mask.width() != t.original_w || mask.height() != t.original_h) {
        throw Error(ErrorCode::DimensionMismatch, "mask does not match the letterboxed image");
    }
    const int side = t.padded_side();
    cv::Mat padded = cv::Mat::zeros(side, side, CV_8UC1);
    detail::mask_view(mask).copyTo(padded(cv::Rect(t.pad_left, t.pad_top, t.original_w, t.original_h)));
    cv::Mat scaled = padded;
    if (side != t.target_side) {
        cv::resize(padded, scaled, cv::Size(t.target_side, t.target_side), 0, 0, cv::INTER_NEAREST);
    }
    BinaryMask out(t.target_side, t.target_side);
    for (int y = 0; y < scaled.rows; ++y)
        for (int x = 0; x < scaled.cols; ++x)
            if (scaled.at<std::uint8_t>(y, x)) out.set(x, y);
    return out;
}

Raster unletterbox(const Raster& img, const LetterboxTransform& t) {
    if (img.width() != t.target_side || img.height() != t.target_side) {
        throw Error(ErrorCode::DimensionMismatch, "image side does not match the letterbox target");
    }
    const int side = t.padded_side();
    cv::Mat square = detail::view(img);
    cv::Mat restored;
    if (side != t.target_side) {
        cv::resize(square, restored, cv::Size(side, side), 0, 0, cv::INTER_LINEAR);
    } else {
        restored = square;
    }
    return detail::from_mat(restored(cv::Rect(t.pad_left, t.pad_top, t.original_w, t.original_h)));
}

namespace {

void fill_quad(BinaryMask& out, const geometry::Quad& quad) {
    const int width = out.width(), height = out.height();
    const auto b = geometry::bounds(quad);
    const int y_begin = std::max(0, static_cast<int>(std::floor(b.min_y)));
    const int y_end = std::min(height, static_cast<int>(std::ceil(b.max_y)) + 1);
    std::vector<double> xs;
    for (int y = y_begin; y < y_end; ++y) {
        const double yc = y + 0.5;
        xs.clear();
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& a = quad.corners[i];
            const auto& c = quad.corners[(i + 1) % 4];
            if (a.y == c.y) continue;
            const double lo = std::min(a.y, c.y), hi = std::max(a.y, c.y);
            if (yc < lo || yc >= hi) continue;
            xs.push_back(a.x + (yc - a.y) * (c.x - a.x) / (c.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // Pixel x is inside when its centre x + 0.5 lies in [xs[k], xs[k+1]).
            const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
            const int x1 = std::min(width, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
            for (int x = x0; x < x1; ++x) out.set(x, y);
        }
    }
}

}  // namespace

BinaryMask rasterize_quad(int width, int height, const geometry::Quad& quad) {
    BinaryMask out(width, height);
    fill_quad(out, quad);
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius <= 0) return mask;
    const int w = mask.width(), h = mask.height();
    BinaryMask horizontal(w, h);
    for (int y = 0; y < h; ++y) {
        int last = -radius - 1;  // most recent set column
        // forward pass covers set pixels to the left, backward pass to the right
        for (int x = 0; x < w; ++x) {
            if (mask.get(x, y)) last = x;
            if (x - last <= radius) horizontal.set(x, y);
        }
        int next = w + radius + 1;
        for (int x = w - 1; x >= 0; --x) {
            if (mask.get(x, y)) next = x;
            if (next - x <= radius) horizontal.set(x, y);
        }
    }
    BinaryMask out(w, h);
    for (int x = 0; x < w; ++x) {
        int last = -radius - 1;
        for (int y = 0; y < h; ++y) {
            if (horizontal.get(x, y)) last = y;
            if (y - last <= radius) out.set(x, y);
        }
        int next = h + radius + 1;
        for (int y = h - 1; y >= 0; --y) {
            if (horizontal.get(x, y)) next = y;
            if (next - y <= radius) out.set(x, y);
        }
    }
    return out;
}

BinaryMask make_mask(int width, int height, std::span<const TextRegion> regions, int dilation) {
    BinaryMask mask(width, height);
    for (const auto& r : regions) {
        if (r.category != Category::Translatable) continue;
        fill_quad(mask, r.quad);
    }
    return dilate(mask, dilation);
}

Raster recombine(const Raster& original, const Raster& inpainted, const BinaryMask& mask) {
    if (!original.same_size(inpainted) || !mask.matches(original) ||
        original.channels() != inpainted.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "recombine inputs differ in shape");
    }
    Raster out = original;
    const int ch = original.channels();
    auto dst = out.pixels();
    auto src = inpainted.pixels();
    auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        std::copy_n(src.begin() + i * ch, ch, dst.begin() + i * ch);
    }
    return out;
}

}  // namespace adloc::imaging
