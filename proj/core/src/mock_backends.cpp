#include "adloc/mock_backends.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/imaging.hpp"

namespace adloc::backends {

std::vector<TextRegion> MockTextDetector::detect(const Raster& img) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    if (dir_.empty()) return {};
    const auto path = dir_ / (content_hash(img) + ".json");
    std::ifstream in(path);
    if (!in) return {};

    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("regions") || !doc["regions"].is_array()) {
        throw Error(ErrorCode::MalformedResponse, "fixture " + path.string() + " is not a region list");
    }
    std::vector<TextRegion> out;
    for (const auto& item : doc["regions"]) {
        TextRegion r;
        try {
            r = item.get<TextRegion>();
            validate(r);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedResponse, "fixture region rejected: " + std::string(e.what()));
        }
        if (r.id.empty()) r.id = "r" + std::to_string(out.size());
        out.push_back(std::move(r));
    }
    return out;
}

std::filesystem::path write_detection_fixture(const std::filesystem::path& fixtures_dir, const Raster& img,
                                              std::span<const TextRegion> regions) {
    std::filesystem::create_directories(fixtures_dir);
    const auto path = fixtures_dir / (content_hash(img) + ".json");
    nlohmann::json doc{{"regions", nlohmann::json::array()}};
    for (const auto& r : regions) doc["regions"].push_back(r);
    std::ofstream(path) << doc.dump(2);
    return path;
}

Raster onion_peel_fill(const Raster& img, const BinaryMask& mask) {
    if (!mask.matches(img)) throw Error(ErrorCode::DimensionMismatch, "mask does not match image");
    const int w = img.width(), h = img.height(), ch = img.channels();
    Raster out = img;
    std::vector<std::uint8_t> known(static_cast<std::size_t>(w) * h);
    std::size_t unknown = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool k = !mask.get(x, y);
            known[static_cast<std::size_t>(y) * w + x] = k;
            unknown += !k;
        }
    if (unknown == known.size()) return out;  // no context to propagate from

    std::vector<std::pair<int, int>> layer;
    while (unknown > 0) {
        layer.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (known[static_cast<std::size_t>(y) * w + x]) continue;
                std::array<int, 4> sum{};
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (!known[static_cast<std::size_t>(ny) * w + nx]) continue;
                        for (int c = 0; c < ch; ++c) sum[c] += out.at(nx, ny, c);
                        ++n;
                    }
                }
                if (n == 0) continue;
                for (int c = 0; c < ch; ++c) out.at(x, y, c) = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
                layer.emplace_back(x, y);
            }
        }
        // A layer only sees the previous layers: values above were written
        // into `out`, but `known` flips after the sweep.
        for (auto [x, y] : layer) known[static_cast<std::size_t>(y) * w + x] = 1;
        unknown -= layer.size();
    }
    return out;
}

Raster MockInpainter::inpaint(const Raster& img, const BinaryMask& mask) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    return onion_peel_fill(img, mask);
}

std::string pseudo_localize(std::string_view text) {
    const std::size_t n = utf8_length(text);
    const std::size_t padded = (n * 13 + 9) / 10;  // ceil(1.3 n) in exact arithmetic
    std::string out = "\xC2\xAB";                  // «
    out += text;
    out.append(padded - n, '~');
    out += "\xC2\xBB";  // »
    return out;
}

std::string MockTranslator::translate(std::string_view text, std::string_view src, std::string_view tgt) {
    locales_.require(src, tgt);
    require_translatable_text(text);
    return pseudo_localize(text);
}

namespace {

Rgb pixel_rgb(const Raster& img, int x, int y) {
    if (img.channels() < 3) {
        const int v = img.at(x, y);
        return {v, v, v};
    }
    return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
}

constexpr int kMinTextContrast = 12;

int quantize(Rgb c) { return ((c.r >> 3) << 10) | ((c.g >> 3) << 5) | (c.b >> 3); }

struct Bin {
    long long count = 0;
    long long r = 0, g = 0, b = 0;
    void add(Rgb c) {
        ++count;
        r += c.r;
        g += c.g;
        b += c.b;
    }
    Rgb mean() const {
        return {static_cast<int>((r + count / 2) / count), static_cast<int>((g + count / 2) / count),
                static_cast<int>((b + count / 2) / count)};
    }
};

int most_frequent(const std::map<int, Bin>& bins) {
    int best = -1;
    long long best_count = -1;
    for (const auto& [key, bin] : bins) {
        if (bin.count > best_count) {
            best = key;
            best_count = bin.count;
        }
    }
    return best;
}

}  // namespace

Rgb dominant_text_color(const Raster& img, const geometry::Quad& quad) {
    const auto b = geometry::bounds(quad);
    const int x0 = std::clamp(static_cast<int>(std::floor(b.min_x)), 0, img.width() - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(b.min_y)), 0, img.height() - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(b.max_x)), x0 + 1, img.width());
    const int y1 = std::clamp(static_cast<int>(std::ceil(b.max_y)), y0 + 1, img.height());

    // Background is what the border looks like; text is what stands apart from it.
    Bin border;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            if (x == x0 || y == y0 || x == x1 - 1 || y == y1 - 1) border.add(pixel_rgb(img, x, y));
        }
    }
    const Rgb bg = border.mean();
    auto distance = [&](Rgb c) {
        return std::min(255, (std::abs(c.r - bg.r) + std::abs(c.g - bg.g) + std::abs(c.b - bg.b)) / 3);
    };

    std::array<std::uint64_t, 256> histogram{};
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) ++histogram[static_cast<std::size_t>(distance(pixel_rgb(img, x, y)))];
    const int threshold = std::max(imaging::otsu_threshold(histogram), kMinTextContrast);

    std::map<int, Bin> foreground;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const Rgb c = pixel_rgb(img, x, y);
            if (distance(c) > threshold) foreground[quantize(c)].add(c);
        }
    }
    if (foreground.empty()) return bg;
    return foreground.at(most_frequent(foreground)).mean();
}

std::string color_name(Rgb c) {
    struct Named {
        const char* name;
        Rgb rgb;
    };
    static constexpr std::array<Named, 16> kPalette{{
        {"Black", {0, 0, 0}},        {"White", {255, 255, 255}},   {"Gray", {128, 128, 128}},
        {"Silver", {192, 192, 192}}, {"Red", {255, 0, 0}},         {"Dark Red", {139, 0, 0}},
        {"Green", {0, 128, 0}},      {"Lime", {0, 255, 0}},        {"Blue", {0, 0, 255}},
        {"Dark Blue", {30, 58, 138}}, {"Yellow", {255, 255, 0}},   {"Orange", {255, 165, 0}},
        {"Purple", {128, 0, 128}},   {"Pink", {255, 192, 203}},    {"Brown", {139, 69, 19}},
        {"Cyan", {0, 255, 255}},
    }};
    const char* best = "Black";
    long best_d = std::numeric_limits<long>::max();
    for (const auto& p : kPalette) {
        const long dr = c.r - p.rgb.r, dg = c.g - p.rgb.g, db = c.b - p.rgb.b;
        const long d = dr * dr + dg * dg + db * db;
        if (d < best_d) {
            best_d = d;
            best = p.name;
        }
    }
    return best;
}

StyleReport MockStyleExtractor::extract_style(const Raster& img, const TextRegion& region, std::string_view) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    StyleReport s;
    s.rgb = dominant_text_color(img, region.quad);
    s.hex = to_hex(s.rgb);
    s.color_name = color_name(s.rgb);
    return s;
}

FontPrediction FallbackFontClassifier::classify_font(const Raster& patch) {
    if (patch.empty()) throw Error(ErrorCode::InvalidArgument, "empty patch");
    return {family_, 0.0, {}};
}

}  // namespace adloc::backends
