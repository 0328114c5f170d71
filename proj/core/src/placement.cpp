#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "adloc/reimposition.hpp"
#include "cv_bridge.hpp"

namespace adloc::reimposition {
namespace {

constexpr int kMaxCentroidPasses = 6;
constexpr double kCentroidTolerance = 0.1;

/// Alpha-over of one colour sample onto base pixel (x, y).
void blend(Raster& base, int x, int y, const std::uint8_t* rgba) {
    const int a = rgba[3];
    if (a == 0) return;
    auto mix = [a](int src, int dst) { return static_cast<std::uint8_t>((a * src + (255 - a) * dst + 127) / 255); };
    switch (base.channels()) {
        case 1: {
            const int luma = (299 * rgba[0] + 587 * rgba[1] + 114 * rgba[2] + 500) / 1000;
            base.at(x, y) = mix(luma, base.at(x, y));
            break;
        }
        case 3:
            for (int c = 0; c < 3; ++c) base.at(x, y, c) = mix(rgba[c], base.at(x, y, c));
            break;
        default:
            for (int c = 0; c < 3; ++c) base.at(x, y, c) = mix(rgba[c], base.at(x, y, c));
            base.at(x, y, 3) = static_cast<std::uint8_t>(a + (255 - a) * base.at(x, y, 3) / 255);
            break;
    }
}

Raster to_rgba(const Raster& patch) {
    if (patch.channels() == 4) return patch;
    cv::Mat rgba;
    cv::cvtColor(detail::view(patch), rgba, patch.channels() == 1 ? cv::COLOR_GRAY2RGBA : cv::COLOR_RGB2RGBA);
    return detail::from_mat(rgba);
}

Placement place_anchored(const Raster& base, const Raster& patch, const BinaryMask& patch_mask,
                         const geometry::Quad& quad) {
    Placement out{base, BinaryMask(base.width(), base.height()), false, {}};
    const int ox = static_cast<int>(std::lround(quad.top_left().x));
    const int oy = static_cast<int>(std::lround(quad.top_left().y));
    bool clipped = false;
    for (int y = 0; y < patch.height(); ++y) {
        for (int x = 0; x < patch.width(); ++x) {
            if (!patch_mask.get(x, y)) continue;
            const int bx = ox + x, by = oy + y;
            if (bx < 0 || by < 0 || bx >= base.width() || by >= base.height()) {
                clipped = true;
                continue;
            }
            const std::uint8_t* px = patch.pixels().data() + patch.offset(x, y);
            if (px[3] == 0) continue;
            blend(out.image, bx, by, px);
            out.glyphs.set(bx, by);
        }
    }
    if (clipped) out.warnings.push_back("text patch clipped at image border");
    return out;
}

Placement place_rotated(const Raster& base, const Raster& patch, const BinaryMask& patch_mask,
                        const geometry::Quad& quad, double theta) {
    Placement out{base, BinaryMask(base.width(), base.height()), true, {}};
    const double c = std::cos(theta), s = std::sin(theta);
    const geometry::Point patch_centre{patch.width() / 2.0, patch.height() / 2.0};
    const geometry::Point target = geometry::centroid(quad);

    // Colour and coverage are warped separately so edge colours do not pick
    // up the transparent border.
    cv::Mat rgba = detail::view(patch);
    cv::Mat color, alpha;
    cv::cvtColor(rgba, color, cv::COLOR_RGBA2RGB);
    cv::extractChannel(rgba, alpha, 3);
    alpha = alpha.clone();
    for (int y = 0; y < patch.height(); ++y)
        for (int x = 0; x < patch.width(); ++x)
            if (!patch_mask.get(x, y)) alpha.at<std::uint8_t>(y, x) = 0;

    geometry::Point shift{0.0, 0.0};
    cv::Mat warped_color, warped_alpha;
    cv::Matx23d final_m;
    for (int pass = 0; pass < kMaxCentroidPasses; ++pass) {
        // Pixel centres sit at +0.5 in quad space and at integers for OpenCV.
        const geometry::Point half{0.5, 0.5};
        const geometry::Point local = half - patch_centre;
        const geometry::Point t = geometry::Point{c * local.x - s * local.y, s * local.x + c * local.y} + target +
                                  shift - half;
        const cv::Matx23d m(c, -s, t.x, s, c, t.y);
        final_m = m;
        const cv::Size size(base.width(), base.height());
        cv::warpAffine(alpha, warped_alpha, m, size, cv::INTER_LINEAR, cv::BORDER_CONSTANT, 0);

        BinaryMask placed(base.width(), base.height());
        for (int y = 0; y < size.height; ++y)
            for (int x = 0; x < size.width; ++x)
                if (warped_alpha.at<std::uint8_t>(y, x) > 0) placed.set(x, y);
        out.glyphs = std::move(placed);
        if (!out.glyphs.any()) break;

        const geometry::Point err = target - mask_centroid(out.glyphs);
        if (std::hypot(err.x, err.y) <= kCentroidTolerance || pass + 1 == kMaxCentroidPasses) {
            cv::warpAffine(color, warped_color, m, size, cv::INTER_LINEAR, cv::BORDER_REPLICATE);
            break;
        }
        shift = shift + err;
    }

    if (!out.glyphs.any()) {
        out.warnings.push_back("rotated text patch fell outside the image");
        return out;
    }
    const cv::Rect ink = cv::boundingRect(alpha);
    for (const cv::Point2d& corner : {cv::Point2d(ink.x, ink.y), cv::Point2d(ink.br().x - 1, ink.y),
                                     cv::Point2d(ink.x, ink.br().y - 1), cv::Point2d(ink.br().x - 1, ink.br().y - 1)}) {
        const double bx = final_m(0, 0) * corner.x + final_m(0, 1) * corner.y + final_m(0, 2);
        const double by = final_m(1, 0) * corner.x + final_m(1, 1) * corner.y + final_m(1, 2);
        if (bx < -0.5 || by < -0.5 || bx > base.width() - 0.5 || by > base.height() - 0.5) {
            out.warnings.push_back("rotated text patch clipped at image border");
            break;
        }
    }

    for (int y = 0; y < base.height(); ++y) {
        for (int x = 0; x < base.width(); ++x) {
            if (!out.glyphs.get(x, y)) continue;
            const auto& rgb = warped_color.at<cv::Vec3b>(y, x);
            const std::uint8_t px[4] = {rgb[0], rgb[1], rgb[2], warped_alpha.at<std::uint8_t>(y, x)};
            blend(out.image, x, y, px);
        }
    }
    return out;
}

}  // namespace

geometry::Point mask_centroid(const BinaryMask& mask) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.get(x, y)) continue;
            sx += x + 0.5;
            sy += y + 0.5;
            ++n;
        }
    }
    if (n == 0) return {};
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

Placement place_text(const Raster& base, const Raster& patch, const BinaryMask& patch_mask,
                     const geometry::Quad& region_quad, PlacementCounters* counters) {
    if (base.empty() || patch.empty()) throw Error(ErrorCode::InvalidArgument, "empty base or patch");
    if (!patch_mask.matches(patch)) throw Error(ErrorCode::DimensionMismatch, "patch mask does not match patch");
    if (!patch_mask.any()) return Placement{base, BinaryMask(base.width(), base.height()), false, {}};

    const Raster rgba = to_rgba(patch);
    const double theta = geometry::snapped_rotation_angle(region_quad);
    if (theta == 0.0) {
        if (counters) ++counters->anchored;
        return place_anchored(base, rgba, patch_mask, region_quad);
    }
    if (counters) ++counters->rotated;
    return place_rotated(base, rgba, patch_mask, region_quad, theta);
}

}  // namespace adloc::reimposition
