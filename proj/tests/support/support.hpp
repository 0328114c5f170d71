#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "adloc/fonts.hpp"
#include "adloc/imaging.hpp"
#include "adloc/pipeline.hpp"
#include "adloc/raster.hpp"
#include "adloc/region.hpp"

namespace adloc::testing {

std::filesystem::path font_dir();
FontSource test_fonts();

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

Raster random_raster(std::mt19937& rng, int w, int h, int channels);
BinaryMask random_mask(std::mt19937& rng, int w, int h, double density);
/// Smooth diagonal RGB gradient.
Raster gradient(int w, int h, int channels = 3);

TextRegion make_region(std::string id, double x0, double y0, double x1, double y1,
                       Category category = Category::Translatable, std::string text = "Sale");

/// A 640x400 ad: gradient background, a Brand logo and two Translatable
/// lines rendered in dark blue.
struct SyntheticAd {
    Raster image;
    std::vector<TextRegion> regions;
};
SyntheticAd synthetic_ad();

/// Writes the mock detector sidecar for `original` as the pipeline will see
/// it (after preprocessing), with `regions` given in original coordinates.
void write_pipeline_fixture(const std::filesystem::path& fixtures_dir, const Raster& original,
                            const std::vector<TextRegion>& regions, const imaging::PreprocessParams& params = {});

/// Store under `store_dir`, mock backends reading sidecars from `fixtures_dir`.
pipeline::Pipeline mock_pipeline(const std::filesystem::path& store_dir, const std::filesystem::path& fixtures_dir);
pipeline::Pipeline pipeline_with(const std::filesystem::path& store_dir, backends::BackendSet backends);
backends::BackendSet mock_backends(const std::filesystem::path& fixtures_dir);

}  // namespace adloc::testing
