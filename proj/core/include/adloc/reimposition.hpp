#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adloc/backends.hpp"
#include "adloc/fonts.hpp"
#include "adloc/geometry.hpp"
#include "adloc/raster.hpp"
#include "adloc/region.hpp"

namespace adloc::reimposition {

// ---------------------------------------------------------------------------
// Font size estimation and adaptation
// ---------------------------------------------------------------------------

struct SizingParams {
    double step = 0.5;
    double floor_ratio = 0.3;
};

/// Throws Error(InvalidArgument) unless step > 0 and 0 < floor_ratio < 1.
void validate(const SizingParams& params);

struct FontSizeEstimate {
    double size = 0.0;
    /// The shrink loop stopped at the floor with capacity still below the
    /// translated length.
    bool overflow = false;

    friend bool operator==(const FontSizeEstimate&, const FontSizeEstimate&) = default;
};

/// Starts at s_o = min(w, h) and, only when the translation is longer than
/// the original, shrinks by `step` while the area capacity w*h/s^2 is below
/// the translated length and s is above floor_ratio * s_o. The loop tests
/// before each decrement, so the result can land up to one step under the
/// floor. Lengths are counted in Unicode scalar values.
FontSizeEstimate estimate_font_size(geometry::Point p1, geometry::Point p2, std::string_view original_text,
                                    std::string_view translated_text, const SizingParams& params = {});

/// Same loop on precomputed dimensions and character counts.
FontSizeEstimate estimate_font_size(geometry::BoxDims dims, std::size_t original_chars,
                                    std::size_t translated_chars, const SizingParams& params = {});

// ---------------------------------------------------------------------------
// Typography and translation units
// ---------------------------------------------------------------------------

struct TypographySpec {
    std::string family;
    double size = 0.0;  // pixel em size
    backends::Rgb color;
    bool bold = false;
    bool italic = false;
    bool underline = false;
    double rotation = 0.0;  // radians

    friend bool operator==(const TypographySpec&, const TypographySpec&) = default;
};

void validate(const TypographySpec& spec);

struct TranslationUnit {
    TextRegion region;
    std::string source_text;
    std::string target_text;
    TypographySpec typography;
    bool overflow = false;

    friend bool operator==(const TranslationUnit&, const TranslationUnit&) = default;
};

void to_json(nlohmann::json& j, const TypographySpec& t);
void from_json(const nlohmann::json& j, TypographySpec& t);
void to_json(nlohmann::json& j, const TranslationUnit& u);
void from_json(const nlohmann::json& j, TranslationUnit& u);

// ---------------------------------------------------------------------------
// Rendering and placement
// ---------------------------------------------------------------------------

inline constexpr double kItalicShearDegrees = 12.0;
inline constexpr int kUnderlineOffset = 2;

struct RenderedPatch {
    Raster rgba;       // colour is uniform, coverage lives in alpha
    BinaryMask mask;   // alpha > 0
};

/// Renders `text` into a transparent dims-sized canvas, wrapping greedily at
/// spaces when a line would exceed the width. Bold uses the family's bold
/// face when present, otherwise a 1 px stroke; italic is a 12 degree shear;
/// underline is a 1 px rule two pixels under each baseline.
RenderedPatch render_text_patch(std::string_view text, const TypographySpec& spec, geometry::BoxDims dims,
                                const FontSource& fonts);

/// Counts which placement path ran.
struct PlacementCounters {
    std::size_t anchored = 0;
    std::size_t rotated = 0;
};

struct Placement {
    Raster image;
    BinaryMask glyphs;  // pixels that received glyph coverage
    bool rotated = false;
    std::vector<std::string> warnings;
};

/// Horizontal quads: the patch's top-left lands on the quad's top-left.
/// Otherwise patch and mask are rotated by the quad's angle and shifted so
/// the placed glyph centroid matches the quad centroid. Composites alpha-over;
/// pixels outside `glyphs` are copied from `base` unchanged.
Placement place_text(const Raster& base, const Raster& patch, const BinaryMask& patch_mask,
                     const geometry::Quad& region_quad, PlacementCounters* counters = nullptr);

/// Mean of set-pixel centres (x + 0.5, y + 0.5). Empty masks give (0, 0).
geometry::Point mask_centroid(const BinaryMask& mask);

struct ReimposeResult {
    Raster image;
    BinaryMask glyphs;
    std::vector<TranslationUnit> units;  // with recomputed sizes and overflow flags
    std::vector<std::string> warnings;
};

/// Unit indices sorted top-to-bottom, then left-to-right, by quad bounds.
std::vector<std::size_t> reading_order(std::span<const TranslationUnit> units);

/// Sizes, renders (in parallel) and places (serially, in reading order)
/// every unit. Failing units are skipped and reported as warnings.
ReimposeResult reimpose_all(const Raster& inpainted, std::span<const TranslationUnit> units, const FontSource& fonts,
                            const SizingParams& params = {}, PlacementCounters* counters = nullptr);

}  // namespace adloc::reimposition
