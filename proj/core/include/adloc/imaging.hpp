#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "adloc/raster.hpp"
#include "adloc/region.hpp"

namespace adloc::imaging {

struct PreprocessParams {
    int median_kernel = 3;
    double clahe_clip_limit = 2.0;
    int clahe_tile_grid = 8;
    int max_side = 1280;
};

/// Despeckle, grayscale, CLAHE, Otsu binarize, then resize (nearest) so the
/// longer side equals max_side. Output is single-channel with values {0,255}.
Raster preprocess_for_detection(const Raster& img, const PreprocessParams& params = {});

/// Threshold maximizing between-class variance; samples > t are foreground.
/// Ties resolve to the smallest t. A single-valued histogram returns that value.
int otsu_threshold(std::span<const std::uint64_t, 256> histogram);

/// Gray input to {0,255} via otsu_threshold.
Raster binarize_otsu(const Raster& gray);

inline constexpr std::uint8_t kLetterboxFill = 127;

/// Everything needed to map between the original image and the square model
/// input. scale = target_side / padded_side.
struct LetterboxTransform {
    int pad_left = 0;
    int pad_top = 0;
    int pad_right = 0;
    int pad_bottom = 0;
    double scale = 1.0;
    int original_w = 0;
    int original_h = 0;
    int target_side = 0;

    int padded_side() const { return original_w + pad_left + pad_right; }

    friend bool operator==(const LetterboxTransform&, const LetterboxTransform&) = default;
};

struct Letterboxed {
    Raster raster;
    LetterboxTransform transform;
};

/// Pads the shorter side symmetrically with mid-gray (odd remainder goes
/// right/bottom), then scales the square to target_side x target_side with
/// bilinear sampling. target_side must be at least 16.
Letterboxed letterbox(const Raster& img, int target_side);

/// Same geometry for a mask: zero padding and nearest-neighbour scaling.
BinaryMask letterbox_mask(const BinaryMask& mask, const LetterboxTransform& t);

/// Inverse of letterbox. Throws Error(DimensionMismatch) if img is not
/// target_side x target_side.
Raster unletterbox(const Raster& img, const LetterboxTransform& t);

/// Pixels whose centre lies inside the quad (even-odd rule), clipped to the image.
BinaryMask rasterize_quad(int width, int height, const geometry::Quad& quad);

/// Square (Chebyshev) dilation by `radius` pixels.
BinaryMask dilate(const BinaryMask& mask, int radius);

inline constexpr int kDefaultMaskDilation = 2;

/// Union of Translatable region quads, dilated. Brand and Certification
/// regions never contribute.
BinaryMask make_mask(int width, int height, std::span<const TextRegion> regions,
                     int dilation = kDefaultMaskDilation);

/// out = inpainted where mask is set, original elsewhere (bit-exact).
Raster recombine(const Raster& original, const Raster& inpainted, const BinaryMask& mask);

}  // namespace adloc::imaging
