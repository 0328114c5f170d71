#pragma once

#include <filesystem>
#include <span>

#include "adloc/backends.hpp"

namespace adloc::backends {

/// Looks up regions in a JSON sidecar keyed by the image's content hash.
/// Images without a sidecar have no text.
class MockTextDetector final : public TextDetector {
public:
    explicit MockTextDetector(std::filesystem::path fixtures_dir) : dir_(std::move(fixtures_dir)) {}
    std::vector<TextRegion> detect(const Raster& img) override;

private:
    std::filesystem::path dir_;
};

/// Writes the sidecar MockTextDetector reads for `img`; returns its path.
std::filesystem::path write_detection_fixture(const std::filesystem::path& fixtures_dir, const Raster& img,
                                              std::span<const TextRegion> regions);

/// Onion-peel fill: each masked pixel takes the rounded mean of its already
/// known 8-neighbours, one boundary layer at a time.
Raster onion_peel_fill(const Raster& img, const BinaryMask& mask);

class MockInpainter final : public Inpainter {
public:
    Raster inpaint(const Raster& img, const BinaryMask& mask) override;
};

inline constexpr double kPseudoLocalizationFactor = 1.3;

/// "Sale" -> "«Sale~~»": pads with '~' to ceil(1.3 * length) characters and
/// wraps the result in guillemets.
std::string pseudo_localize(std::string_view text);

class MockTranslator final : public Translator {
public:
    explicit MockTranslator(LocaleTable locales) : locales_(std::move(locales)) {}
    std::string translate(std::string_view text, std::string_view src, std::string_view tgt) override;

private:
    LocaleTable locales_;
};

/// Most frequent quantized colour among the patch pixels that stand out from
/// the mean border colour (Otsu split on the distance to it). The reported
/// colour is the mean of that bin; a flat patch gives the border colour.
Rgb dominant_text_color(const Raster& img, const geometry::Quad& quad);

/// Closest entry of a small named palette.
std::string color_name(Rgb c);

class MockStyleExtractor final : public StyleExtractor {
public:
    StyleReport extract_style(const Raster& img, const TextRegion& region, std::string_view context) override;
};

/// Always answers the configured default family with confidence 0.
class FallbackFontClassifier final : public FontClassifier {
public:
    explicit FallbackFontClassifier(std::string family) : family_(std::move(family)) {}
    FontPrediction classify_font(const Raster& patch) override;

private:
    std::string family_;
};

}  // namespace adloc::backends
