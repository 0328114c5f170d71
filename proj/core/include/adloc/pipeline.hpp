#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adloc/backends.hpp"
#include "adloc/fonts.hpp"
#include "adloc/imaging.hpp"
#include "adloc/job.hpp"
#include "adloc/reimposition.hpp"
#include "adloc/store.hpp"

namespace adloc::pipeline {

struct PipelineOptions {
    imaging::PreprocessParams preprocess;
    int letterbox_side = 512;
    int mask_dilation = imaging::kDefaultMaskDilation;
    reimposition::SizingParams sizing;
    /// Product description substituted into the style prompt.
    std::string style_context = "a consumer product";
    /// Family name the font classifier answers when it has nothing better;
    /// maps to the default face without a warning.
    std::string fallback_font_family = "default-sans";
};

/// The job state machine. Every operation loads the job under its per-job
/// lock, checks the source state, does the work and commits once; a job is
/// never observed half-way through a transition.
///
/// Backend failures in detection and inpainting leave the state unchanged,
/// append a warning to the job and rethrow. Translation failures are per
/// region: the region is skipped with a warning.
class Pipeline {
public:
    Pipeline(std::shared_ptr<JobStore> store, backends::BackendSet backends, FontSource fonts, LocaleTable locales,
             PipelineOptions options = {});

    JobStore& store() noexcept { return *store_; }
    const LocaleTable& locales() const noexcept { return locales_; }

    /// Throws Error(UnsupportedPair) before anything is persisted. The image
    /// is stored as 8-bit RGB.
    LocalizationJob create_job(const Raster& image, std::string_view src, std::string_view tgt);
    /// As above from encoded bytes; Error(UndecodableImage) persists nothing.
    LocalizationJob create_job(std::span<const std::uint8_t> encoded, std::string_view src, std::string_view tgt);

    LocalizationJob get(std::string_view id) const;
    std::vector<LocalizationJob> list() const;

    LocalizationJob run_detection(std::string_view id);
    /// Replaces the regions wholesale. With `expected_version`, a stale
    /// version raises Error(Conflict).
    LocalizationJob submit_annotations(std::string_view id, std::vector<TextRegion> regions,
                                       std::optional<std::uint64_t> expected_version = std::nullopt);
    LocalizationJob run_inpaint(std::string_view id);
    LocalizationJob run_translate(std::string_view id);
    /// Translated -> Reimposed -> InReview in a single commit.
    LocalizationJob run_reimpose(std::string_view id);
    /// Replaying the key of the decision that closed the job returns the job
    /// as it is; any other decision on a terminal job is invalid-transition.
    LocalizationJob submit_decision(std::string_view id, ReviewDecision decision,
                                    std::optional<std::string> idempotency_key = std::nullopt);

    /// Runs machine stages until the job reaches `target` (Reimposed means
    /// InReview). Refuses up front, with Error(InvalidTransition), a target
    /// behind the job, a terminal target, or a path through the annotation
    /// gate unless `auto_annotate` accepts the detected regions as they are.
    LocalizationJob advance(std::string_view id, JobState target, bool auto_annotate = false);

    /// A Rejected job's regions and original image in a fresh job at Annotated.
    LocalizationJob clone_for_rework(std::string_view id);

private:
    LocalizationJob fail_stage(LocalizationJob job, std::string_view stage, const std::exception& e);
    static void require_state(const LocalizationJob& job, JobState expected, std::string_view op);
    static void stamp(LocalizationJob& job, JobState s);

    std::shared_ptr<JobStore> store_;
    backends::BackendSet backends_;
    FontSource fonts_;
    LocaleTable locales_;
    PipelineOptions options_;
};

}  // namespace adloc::pipeline
