#include <algorithm>
#include <future>
#include <numeric>
#include <optional>

#include "adloc/error.hpp"
#include "adloc/reimposition.hpp"

namespace adloc::reimposition {

std::vector<std::size_t> reading_order(std::span<const TranslationUnit> units) {
    std::vector<std::size_t> order(units.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ba = geometry::bounds(units[a].region.quad);
        const auto bb = geometry::bounds(units[b].region.quad);
        if (ba.min_y != bb.min_y) return ba.min_y < bb.min_y;
        return ba.min_x < bb.min_x;
    });
    return order;
}

namespace {

struct Prepared {
    std::optional<RenderedPatch> patch;
    std::string error;
};

Prepared prepare_unit(TranslationUnit& unit, const FontSource& fonts, const SizingParams& params) {
    Prepared p;
    try {
        const auto dims = geometry::upright_dims(unit.region.quad);
        const auto estimate = estimate_font_size(geometry::Point{0.0, 0.0}, geometry::Point{dims.w, dims.h},
                                                 unit.source_text, unit.target_text, params);
        unit.typography.size = estimate.size;
        unit.overflow = estimate.overflow;
        p.patch = render_text_patch(unit.target_text, unit.typography, dims, fonts);
    } catch (const std::exception& e) {
        p.error = "unit '" + unit.region.id + "': " + e.what();
    }
    return p;
}

}  // namespace

ReimposeResult reimpose_all(const Raster& inpainted, std::span<const TranslationUnit> units, const FontSource& fonts,
                            const SizingParams& params, PlacementCounters* counters) {
    validate(params);
    ReimposeResult result{inpainted, BinaryMask(inpainted.width(), inpainted.height()),
                          std::vector<TranslationUnit>(units.begin(), units.end()), {}};

    // Rendering is pure per unit; compositing below is serial.
    std::vector<std::future<Prepared>> jobs;
    jobs.reserve(result.units.size());
    for (auto& unit : result.units) {
        jobs.push_back(std::async(std::launch::async, prepare_unit, std::ref(unit), std::cref(fonts), params));
    }
    std::vector<Prepared> prepared;
    prepared.reserve(jobs.size());
    for (auto& j : jobs) prepared.push_back(j.get());

    for (std::size_t idx : reading_order(result.units)) {
        const auto& unit = result.units[idx];
        const auto& p = prepared[idx];
        if (!p.patch) {
            result.warnings.push_back(p.error);
            continue;
        }
        if (unit.overflow) {
            result.warnings.push_back("unit '" + unit.region.id + "': translated text overflows its box");
        }
        try {
            auto placed = place_text(result.image, p.patch->rgba, p.patch->mask, unit.region.quad, counters);
            result.image = std::move(placed.image);
            result.glyphs = result.glyphs | placed.glyphs;
            for (auto& w : placed.warnings) result.warnings.push_back("unit '" + unit.region.id + "': " + w);
        } catch (const std::exception& e) {
            result.warnings.push_back("unit '" + unit.region.id + "': " + e.what());
        }
    }
    return result;
}

}  // namespace adloc::reimposition
