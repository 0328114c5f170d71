#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>

#include "adloc/error.hpp"
#include "adloc/evaluation.hpp"
#include "adloc/region.hpp"

namespace adloc::evaluation {
namespace {

bool is_unicode_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
           c == 0x3000;
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    return edit_distance(utf8_decode(a), utf8_decode(b));
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::u32string current;
    for (char32_t c : utf8_decode(text)) {
        if (is_unicode_space(c)) {
            if (!current.empty()) tokens.push_back(utf8_encode(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(utf8_encode(current));
    return tokens;
}

double wer(std::string_view ref, std::string_view hyp) {
    const auto r = tokenize(ref);
    if (r.empty()) throw Error(ErrorCode::EmptyReference, "WER needs at least one reference token");
    const auto h = tokenize(hyp);
    return static_cast<double>(edit_distance(r, h)) / static_cast<double>(r.size());
}

double cer(std::string_view ref, std::string_view hyp) {
    const auto r = utf8_decode(ref);
    if (r.empty()) throw Error(ErrorCode::EmptyReference, "CER needs a non-empty reference");
    return static_cast<double>(edit_distance(r, utf8_decode(hyp))) / static_cast<double>(r.size());
}

double f1_tokens(std::string_view ref, std::string_view hyp) {
    const auto r = tokenize(ref);
    const auto h = tokenize(hyp);
    if (r.empty() && h.empty()) return 1.0;
    if (r.empty() || h.empty()) return 0.0;
    std::map<std::string, std::size_t> counts;
    for (const auto& t : r) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : h) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(h.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(r.size());
    return 2.0 * precision * recall / (precision + recall);
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::ispunct(c)) continue;
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
    return out;
}

double ssim(const Raster& a, const Raster& b) {
    if (!a.same_size(b)) throw Error(ErrorCode::DimensionMismatch, "SSIM inputs differ in size");
    const Raster ga = to_gray(a);
    const Raster gb = to_gray(b);
    const int w = ga.width(), h = ga.height();
    const int ww = std::min(kSsimWindow, w), wh = std::min(kSsimWindow, h);

    // Integral images of x, y, x^2, y^2 and xy; all exact in 64-bit integers.
    const std::size_t stride = static_cast<std::size_t>(w) + 1;
    std::vector<std::int64_t> sa(stride * (h + 1)), sb(sa.size()), saa(sa.size()), sbb(sa.size()), sab(sa.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int64_t va = ga.at(x, y), vb = gb.at(x, y);
            const std::size_t i = (y + 1) * stride + (x + 1);
            const std::size_t up = y * stride + (x + 1), left = (y + 1) * stride + x, diag = y * stride + x;
            sa[i] = va + sa[up] + sa[left] - sa[diag];
            sb[i] = vb + sb[up] + sb[left] - sb[diag];
            saa[i] = va * va + saa[up] + saa[left] - saa[diag];
            sbb[i] = vb * vb + sbb[up] + sbb[left] - sbb[diag];
            sab[i] = va * vb + sab[up] + sab[left] - sab[diag];
        }
    }
    auto box = [&](const std::vector<std::int64_t>& s, int x, int y) {
        return s[(y + wh) * stride + (x + ww)] - s[y * stride + (x + ww)] - s[(y + wh) * stride + x] + s[y * stride + x];
    };

    const double n = static_cast<double>(ww) * wh;
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double c2 = (0.03 * 255) * (0.03 * 255);
    double total = 0.0;
    std::size_t windows = 0;
    for (int y = 0; y + wh <= h; ++y) {
        for (int x = 0; x + ww <= w; ++x) {
            const std::int64_t xa = box(sa, x, y), xb = box(sb, x, y);
            const auto ni = static_cast<std::int64_t>(ww) * wh;
            // Scaled by n^2: mean products and (population) covariances.
            const double mu_ab = static_cast<double>(xa * xb) / (n * n);
            const double mu_aa = static_cast<double>(xa * xa) / (n * n);
            const double mu_bb = static_cast<double>(xb * xb) / (n * n);
            const double var_a = static_cast<double>(ni * box(saa, x, y) - xa * xa) / (n * n);
            const double var_b = static_cast<double>(ni * box(sbb, x, y) - xb * xb) / (n * n);
            const double cov = static_cast<double>(ni * box(sab, x, y) - xa * xb) / (n * n);
            const double num = (2.0 * mu_ab + c1) * (2.0 * cov + c2);
            const double den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

PerceptualScore SsimMetric::score(const Raster& a, const Raster& b) const {
    return {name(), ssim(a, b), false};
}

}  // namespace adloc::evaluation
