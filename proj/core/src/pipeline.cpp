#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <set>

#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "adloc/mock_backends.hpp"
#include "adloc/pipeline.hpp"
#include "cv_bridge.hpp"

namespace adloc::pipeline {
namespace {

Raster to_rgb(const Raster& img) {
    if (img.channels() == 3) return img;
    cv::Mat out;
    cv::cvtColor(detail::view(img), out, img.channels() == 1 ? cv::COLOR_GRAY2RGB : cv::COLOR_RGBA2RGB);
    return detail::from_mat(out);
}

Raster crop(const Raster& img, const geometry::Quad& quad) {
    const auto b = geometry::bounds(quad);
    const int x0 = std::clamp(static_cast<int>(std::floor(b.min_x)), 0, img.width() - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(b.min_y)), 0, img.height() - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(b.max_x)), x0 + 1, img.width());
    const int y1 = std::clamp(static_cast<int>(std::ceil(b.max_y)), y0 + 1, img.height());
    return detail::from_mat(detail::view(img)(cv::Rect(x0, y0, x1 - x0, y1 - y0)));
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

/// Fills in missing ids and locales; duplicate ids are an error.
void normalize_regions(std::vector<TextRegion>& regions, const std::string& locale) {
    std::set<std::string> seen;
    for (const auto& r : regions) {
        if (!r.id.empty() && !seen.insert(r.id).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate region id '" + r.id + "'");
        }
    }
    int next = 1;
    for (auto& r : regions) {
        if (r.id.empty()) {
            while (seen.contains("r" + std::to_string(next))) ++next;
            r.id = "r" + std::to_string(next);
            seen.insert(r.id);
        }
        if (r.locale.empty()) r.locale = locale;
    }
}

struct UnitOutcome {
    std::optional<reimposition::TranslationUnit> unit;
    std::vector<std::string> warnings;
};

}  // namespace

Pipeline::Pipeline(std::shared_ptr<JobStore> store, backends::BackendSet backends, FontSource fonts,
                   LocaleTable locales, PipelineOptions options)
    : store_(std::move(store)),
      backends_(std::move(backends)),
      fonts_(std::move(fonts)),
      locales_(std::move(locales)),
      options_(std::move(options)) {
    if (!store_) throw Error(ErrorCode::InvalidArgument, "pipeline needs a store");
    if (!backends_.detector || !backends_.inpainter || !backends_.translator || !backends_.style ||
        !backends_.fonts) {
        throw Error(ErrorCode::InvalidArgument, "pipeline needs all five backends");
    }
    reimposition::validate(options_.sizing);
    if (options_.letterbox_side < 16) throw Error(ErrorCode::InvalidArgument, "letterbox side must be >= 16");
    if (options_.mask_dilation < 0) throw Error(ErrorCode::InvalidArgument, "mask dilation must be >= 0");
}

void Pipeline::require_state(const LocalizationJob& job, JobState expected, std::string_view op) {
    if (job.state != expected) {
        throw Error(ErrorCode::InvalidTransition, std::string(op) + " needs a job in " + std::string(to_string(expected)) +
                                                      "; job " + job.id + " is " + std::string(to_string(job.state)));
    }
}

void Pipeline::stamp(LocalizationJob& job, JobState s) {
    job.state = s;
    job.timestamps.push_back({s, now_iso8601()});
}

LocalizationJob Pipeline::fail_stage(LocalizationJob job, std::string_view stage, const std::exception& e) {
    job.warnings.push_back(std::string(stage) + " failed: " + e.what());
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::create_job(const Raster& image, std::string_view src, std::string_view tgt) {
    locales_.require(src, tgt);
    if (image.empty()) throw Error(ErrorCode::UndecodableImage, "empty image");
    const Raster rgb = to_rgb(image);

    LocalizationJob job;
    job.id = store_->new_id();
    job.src_locale = src;
    job.tgt_locale = tgt;
    store_->create_dir(job.id);
    auto lock = store_->lock(job.id);
    stamp(job, JobState::Uploaded);
    job.artifact_paths[kOriginal] = store_->put_artifact(job, kOriginal, rgb);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::create_job(std::span<const std::uint8_t> encoded, std::string_view src,
                                     std::string_view tgt) {
    locales_.require(src, tgt);
    return create_job(decode_image(encoded), src, tgt);
}

LocalizationJob Pipeline::get(std::string_view id) const { return store_->load(id); }

std::vector<LocalizationJob> Pipeline::list() const { return store_->list(); }

LocalizationJob Pipeline::run_detection(std::string_view id) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    require_state(job, JobState::Uploaded, "detection");
    const Raster original = store_->read_artifact(job, kOriginal);

    const Raster pre = imaging::preprocess_for_detection(original, options_.preprocess);
    std::vector<TextRegion> found;
    try {
        found = backends_.detector->detect(pre);
    } catch (const std::exception& e) {
        fail_stage(std::move(job), "detection", e);
        throw;
    }

    const double sx = static_cast<double>(original.width()), sy = static_cast<double>(original.height());
    std::vector<TextRegion> regions;
    for (auto r : found) {
        for (auto& c : r.quad.corners) {
            c.x = c.x * sx / pre.width();
            c.y = c.y * sy / pre.height();
        }
        try {
            validate(r);
            regions.push_back(std::move(r));
        } catch (const Error& e) {
            job.warnings.push_back("detection: dropped region '" + r.id + "': " + e.what());
        }
    }
    normalize_regions(regions, job.src_locale);
    job.regions = std::move(regions);
    stamp(job, JobState::Detected);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::submit_annotations(std::string_view id, std::vector<TextRegion> regions,
                                             std::optional<std::uint64_t> expected_version) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    if (expected_version && *expected_version != job.version) {
        throw Error(ErrorCode::Conflict, "job " + job.id + " is at version " + std::to_string(job.version) +
                                             ", not " + std::to_string(*expected_version));
    }
    require_state(job, JobState::Detected, "annotation");
    for (const auto& r : regions) validate(r);
    normalize_regions(regions, job.src_locale);
    job.regions = std::move(regions);
    stamp(job, JobState::Annotated);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::run_inpaint(std::string_view id) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    require_state(job, JobState::Annotated, "inpainting");
    const Raster original = store_->read_artifact(job, kOriginal);

    const BinaryMask mask =
        imaging::make_mask(original.width(), original.height(), job.regions, options_.mask_dilation);
    Raster background = original;
    if (mask.any()) {
        try {
            const auto boxed = imaging::letterbox(original, options_.letterbox_side);
            const BinaryMask boxed_mask = imaging::letterbox_mask(mask, boxed.transform);
            const Raster filled = backends_.inpainter->inpaint(boxed.raster, boxed_mask);
            background = imaging::recombine(original, imaging::unletterbox(filled, boxed.transform), mask);
        } catch (const std::exception& e) {
            fail_stage(std::move(job), "inpainting", e);
            throw;
        }
    }

    job.artifact_paths[kMask] = store_->put_artifact(job, kMask, mask_to_raster(mask));
    job.artifact_paths[kBackground] = store_->put_artifact(job, kBackground, background);
    stamp(job, JobState::Inpainted);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::run_translate(std::string_view id) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    require_state(job, JobState::Inpainted, "translation");
    const Raster original = store_->read_artifact(job, kOriginal);

    auto translate_region = [&](const TextRegion& region) {
        UnitOutcome out;
        const std::string tag = "translation: region '" + region.id + "': ";
        if (blank(region.text)) {
            out.warnings.push_back(tag + "no text to translate; skipped");
            return out;
        }
        reimposition::TranslationUnit unit;
        unit.region = region;
        unit.source_text = region.text;
        try {
            unit.target_text = backends_.translator->translate(region.text, job.src_locale, job.tgt_locale);
        } catch (const std::exception& e) {
            out.warnings.push_back(tag + "skipped: " + e.what());
            return out;
        }

        backends::StyleReport style;
        try {
            style = backends_.style->extract_style(original, region, options_.style_context);
        } catch (const std::exception& e) {
            style = {};
            style.rgb = backends::dominant_text_color(original, region.quad);
            style.hex = backends::to_hex(style.rgb);
            style.color_name = backends::color_name(style.rgb);
            out.warnings.push_back(tag + "style extraction failed (" + e.what() + "); using dominant colour " +
                                   style.hex);
        }

        std::string family = fonts_.default_face();
        try {
            const auto prediction = backends_.fonts->classify_font(crop(original, region.quad));
            if (!prediction.warning.empty()) out.warnings.push_back(tag + prediction.warning);
            if (fonts_.has_family(prediction.family)) {
                family = prediction.family;
            } else if (prediction.family != options_.fallback_font_family) {
                out.warnings.push_back(tag + "font '" + prediction.family + "' is not installed; using '" + family +
                                       "'");
            }
        } catch (const std::exception& e) {
            out.warnings.push_back(tag + "font classification failed (" + e.what() + "); using '" + family + "'");
        }

        const auto dims = geometry::upright_dims(region.quad);
        const auto estimate = reimposition::estimate_font_size(geometry::Point{0.0, 0.0},
                                                               geometry::Point{dims.w, dims.h}, unit.source_text,
                                                               unit.target_text, options_.sizing);
        unit.typography = {family,     estimate.size,    style.rgb, style.bold, style.italic,
                           style.underline, geometry::snapped_rotation_angle(region.quad)};
        unit.overflow = estimate.overflow;
        out.unit = std::move(unit);
        return out;
    };

    std::vector<std::future<UnitOutcome>> pending;
    for (const auto& region : job.regions) {
        if (region.category != Category::Translatable) continue;
        pending.push_back(std::async(std::launch::async, translate_region, std::cref(region)));
    }
    std::vector<reimposition::TranslationUnit> units;
    for (auto& f : pending) {
        auto outcome = f.get();
        for (auto& w : outcome.warnings) job.warnings.push_back(std::move(w));
        if (outcome.unit) units.push_back(std::move(*outcome.unit));
    }
    job.units = std::move(units);
    stamp(job, JobState::Translated);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::run_reimpose(std::string_view id) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    require_state(job, JobState::Translated, "reimposition");
    const Raster background = store_->read_artifact(job, kBackground);

    auto result = reimposition::reimpose_all(background, job.units, fonts_, options_.sizing, nullptr);
    for (auto& w : result.warnings) job.warnings.push_back("reimposition: " + w);
    job.units = std::move(result.units);
    job.artifact_paths[kLocalized] = store_->put_artifact(job, kLocalized, result.image);
    stamp(job, JobState::Reimposed);
    stamp(job, JobState::InReview);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::submit_decision(std::string_view id, ReviewDecision decision,
                                          std::optional<std::string> idempotency_key) {
    auto lock = store_->lock(id);
    auto job = store_->load(id);
    if (is_terminal(job.state) && idempotency_key && job.decision_key == idempotency_key) return job;
    require_state(job, JobState::InReview, "a review decision");
    validate(decision);
    decision.decided_at = now_iso8601();
    stamp(job, decision.verdict == Verdict::Approve ? JobState::Approved : JobState::Rejected);
    job.decision = std::move(decision);
    job.decision_key = std::move(idempotency_key);
    store_->commit(job);
    return job;
}

LocalizationJob Pipeline::advance(std::string_view id, JobState target, bool auto_annotate) {
    if (target == JobState::Reimposed) target = JobState::InReview;
    auto job = get(id);
    if (is_terminal(target)) {
        throw Error(ErrorCode::InvalidTransition, "terminal states are reached through a review decision");
    }
    if (rank(target) <= rank(job.state)) {
        throw Error(ErrorCode::InvalidTransition, "job " + job.id + " is already " +
                                                      std::string(to_string(job.state)) + ", cannot advance to " +
                                                      std::string(to_string(target)));
    }
    if (!auto_annotate && rank(job.state) < rank(JobState::Annotated) && rank(target) >= rank(JobState::Annotated)) {
        throw Error(ErrorCode::InvalidTransition, "job " + job.id + " needs human annotations before " +
                                                      std::string(to_string(target)));
    }
    while (job.state != target) {
        switch (job.state) {
            case JobState::Uploaded: job = run_detection(id); break;
            case JobState::Detected: job = submit_annotations(id, job.regions); break;
            case JobState::Annotated: job = run_inpaint(id); break;
            case JobState::Inpainted: job = run_translate(id); break;
            case JobState::Translated: job = run_reimpose(id); break;
            default:
                throw Error(ErrorCode::InvalidTransition, "no machine stage leaves " + std::string(to_string(job.state)));
        }
    }
    return job;
}

LocalizationJob Pipeline::clone_for_rework(std::string_view id) {
    const auto source = get(id);
    require_state(source, JobState::Rejected, "rework");
    const Raster original = store_->read_artifact(source, kOriginal);

    LocalizationJob job;
    job.id = store_->new_id();
    job.src_locale = source.src_locale;
    job.tgt_locale = source.tgt_locale;
    job.regions = source.regions;
    job.parent_id = source.id;
    store_->create_dir(job.id);
    auto lock = store_->lock(job.id);
    for (JobState s : {JobState::Uploaded, JobState::Detected, JobState::Annotated}) stamp(job, s);
    job.artifact_paths[kOriginal] = store_->put_artifact(job, kOriginal, original);
    store_->commit(job);
    return job;
}

}  // namespace adloc::pipeline
