#include "support.hpp"

#include <atomic>

#include <unistd.h>

#include "adloc/mock_backends.hpp"
#include "adloc/reimposition.hpp"

#ifndef ADLOC_TEST_FONT_DIR
#define ADLOC_TEST_FONT_DIR "/usr/share/fonts/truetype/dejavu"
#endif

namespace fs = std::filesystem;

namespace adloc::testing {

fs::path font_dir() { return ADLOC_TEST_FONT_DIR; }

FontSource test_fonts() { return FontSource(font_dir(), "DejaVu Sans"); }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("adloc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Raster random_raster(std::mt19937& rng, int w, int h, int channels) {
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
    for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
    return Raster(w, h, channels, std::move(px));
}

BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
    std::bernoulli_distribution bit(density);
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (bit(rng)) m.set(x, y);
    return m;
}

Raster gradient(int w, int h, int channels) {
    Raster img(w, h, channels);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                const double t = (static_cast<double>(x) / w + static_cast<double>(y) / h) / 2.0;
                img.at(x, y, c) = static_cast<std::uint8_t>(60 + 150 * t + 10 * c);
            }
        }
    }
    return img;
}

TextRegion make_region(std::string id, double x0, double y0, double x1, double y1, Category category,
                       std::string text) {
    TextRegion r;
    r.id = std::move(id);
    r.quad = geometry::axis_aligned_quad({x0, y0}, {x1, y1});
    r.category = category;
    r.text = std::move(text);
    r.confidence = 0.9;
    r.locale = "en-US";
    return r;
}

SyntheticAd synthetic_ad() {
    SyntheticAd ad;
    Raster img(640, 400, 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>(225 + 20 * x / img.width());
            img.at(x, y, 1) = static_cast<std::uint8_t>(215 + 25 * y / img.height());
            img.at(x, y, 2) = 200;
        }
    }
    ad.regions = {
        make_region("logo", 30, 20, 190, 70, Category::Brand, "ACME"),
        make_region("headline", 60, 140, 580, 220, Category::Translatable, "SUMMER SALE"),
        make_region("offer", 120, 270, 520, 320, Category::Translatable, "Up to 50% off"),
    };
    const FontSource fonts = test_fonts();
    for (const auto& r : ad.regions) {
        const auto dims = geometry::upright_dims(r.quad);
        reimposition::TypographySpec spec;
        spec.family = "DejaVu Sans";
        spec.size = dims.h * 0.7;
        spec.color = r.category == Category::Brand ? backends::Rgb{180, 20, 20} : backends::Rgb{30, 58, 138};
        spec.bold = r.category == Category::Brand;
        const auto patch = reimposition::render_text_patch(r.text, spec, dims, fonts);
        img = reimposition::place_text(img, patch.rgba, patch.mask, r.quad).image;
    }
    ad.image = std::move(img);
    return ad;
}

void write_pipeline_fixture(const fs::path& fixtures_dir, const Raster& original,
                            const std::vector<TextRegion>& regions, const imaging::PreprocessParams& params) {
    const Raster pre = imaging::preprocess_for_detection(original, params);
    const double sx = static_cast<double>(pre.width()) / original.width();
    const double sy = static_cast<double>(pre.height()) / original.height();
    std::vector<TextRegion> scaled = regions;
    for (auto& r : scaled) {
        for (auto& c : r.quad.corners) {
            c.x *= sx;
            c.y *= sy;
        }
    }
    fs::create_directories(fixtures_dir);
    backends::write_detection_fixture(fixtures_dir, pre, scaled);
}

backends::BackendSet mock_backends(const fs::path& fixtures_dir) {
    backends::BackendConfig config;
    config.mode = backends::Mode::Mock;
    config.fixtures_dir = fixtures_dir;
    return backends::make_backends(config, LocaleTable::defaults());
}

pipeline::Pipeline pipeline_with(const fs::path& store_dir, backends::BackendSet backends) {
    return pipeline::Pipeline(std::make_shared<pipeline::JobStore>(store_dir), std::move(backends), test_fonts(),
                              LocaleTable::defaults());
}

pipeline::Pipeline mock_pipeline(const fs::path& store_dir, const fs::path& fixtures_dir) {
    return pipeline_with(store_dir, mock_backends(fixtures_dir));
}

}  // namespace adloc::testing
