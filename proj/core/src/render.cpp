#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/freetype.hpp>
#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "adloc/reimposition.hpp"
#include "cv_bridge.hpp"

namespace adloc::reimposition {
namespace {

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            if (!current.empty()) words.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

int text_width(cv::freetype::FreeType2& ft, const std::string& s, int height) {
    int baseline = 0;
    return ft.getTextSize(s, height, -1, &baseline).width;
}

std::vector<std::string> wrap_lines(cv::freetype::FreeType2& ft, const std::vector<std::string>& words, int height,
                                    int max_width) {
    std::vector<std::string> lines;
    std::string line;
    for (const auto& word : words) {
        if (line.empty()) {
            line = word;
            continue;
        }
        std::string candidate = line + " " + word;
        if (text_width(ft, candidate, height) <= max_width) {
            line = std::move(candidate);
        } else {
            lines.push_back(std::move(line));
            line = word;
        }
    }
    if (!line.empty()) lines.push_back(std::move(line));
    return lines;
}

}  // namespace

RenderedPatch render_text_patch(std::string_view text, const TypographySpec& spec, geometry::BoxDims dims,
                                const FontSource& fonts) {
    validate(spec);
    if (!(dims.w > 0.0) || !(dims.h > 0.0)) throw Error(ErrorCode::DegenerateBox, "patch has zero size");
    const int w = std::max(1, static_cast<int>(std::ceil(dims.w)));
    const int h = std::max(1, static_cast<int>(std::ceil(dims.h)));

    RenderedPatch out{Raster(w, h, 4), BinaryMask(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.rgba.at(x, y, 0) = static_cast<std::uint8_t>(spec.color.r);
            out.rgba.at(x, y, 1) = static_cast<std::uint8_t>(spec.color.g);
            out.rgba.at(x, y, 2) = static_cast<std::uint8_t>(spec.color.b);
        }
    }
    const auto words = split_words(text);
    if (words.empty()) return out;

    const ResolvedFace face = fonts.resolve(spec.family, spec.bold);
    auto ft = cv::freetype::createFreeType2();
    ft->loadFontData(face.path.string(), 0);

    const int em = std::max(1, static_cast<int>(std::lround(spec.size)));
    int descent = 0;
    const int ascent = ft->getTextSize("Hdlkb", em, -1, &descent).height;
    ft->getTextSize("gjpqy", em, -1, &descent);
    const int line_advance = std::max(em, ascent + descent + 1);

    cv::Mat canvas = cv::Mat::zeros(h, w, CV_8UC3);
    const auto lines = wrap_lines(*ft, words, em, w);
    int baseline = ascent;
    for (const auto& line : lines) {
        ft->putText(canvas, line, cv::Point(0, baseline), em, cv::Scalar::all(255), -1, cv::LINE_AA, true);
        if (spec.underline) {
            const int rule_y = baseline + kUnderlineOffset;
            const int rule_w = std::min(w, text_width(*ft, line, em));
            if (rule_y >= 0 && rule_y < h && rule_w > 0) {
                canvas(cv::Rect(0, rule_y, rule_w, 1)).setTo(cv::Scalar::all(255));
            }
        }
        baseline += line_advance;
    }

    cv::Mat coverage;
    cv::extractChannel(canvas, coverage, 0);
    if (spec.bold && !face.bold_face) {
        cv::dilate(coverage, coverage, cv::getStructuringElement(cv::MORPH_RECT, cv::Size(3, 3)));
    }
    if (spec.italic) {
        const double k = std::tan(kItalicShearDegrees * std::numbers::pi / 180.0);
        // x' = x + k * (h/2 - y): the top leans right, the middle row stays put.
        const cv::Matx23d shear(1.0, -k, k * h / 2.0, 0.0, 1.0, 0.0);
        cv::Mat sheared;
        cv::warpAffine(coverage, sheared, shear, coverage.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT, 0);
        coverage = sheared;
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto a = coverage.at<std::uint8_t>(y, x);
            out.rgba.at(x, y, 3) = a;
            if (a > 0) out.mask.set(x, y);
        }
    }
    return out;
}

}  // namespace adloc::reimposition
