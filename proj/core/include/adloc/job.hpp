#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adloc/region.hpp"
#include "adloc/reimposition.hpp"

namespace adloc::pipeline {

enum class JobState { Uploaded, Detected, Annotated, Inpainted, Translated, Reimposed, InReview, Approved, Rejected };

std::string_view to_string(JobState s);
/// Accepts the exact names ("InReview") and lowercase aliases ("in-review",
/// "inreview", "reimpose"...). Throws Error(InvalidArgument).
JobState state_from_string(std::string_view s);

/// Position along the linear part of the graph; both terminal states share
/// the last rank.
int rank(JobState s);
bool is_terminal(JobState s);
/// True only for the declared edges.
bool is_edge(JobState from, JobState to);

inline constexpr int kSchemaVersion = 1;

// Artifact names; the file on disk is "<name>.png".
inline constexpr const char* kOriginal = "original";
inline constexpr const char* kMask = "mask";
inline constexpr const char* kBackground = "background";
inline constexpr const char* kLocalized = "localized";

/// The state whose completion produces the artifact. Throws Error(NotFound).
JobState artifact_stage(std::string_view artifact);
/// Artifacts that must exist once a job is in `s`.
std::vector<std::string> artifacts_for(JobState s);

enum class Verdict { Approve, Reject };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct ReviewCriteria {
    bool visual_coherence = false;
    bool translation_accuracy = false;
    bool rendering_quality = false;

    friend bool operator==(const ReviewCriteria&, const ReviewCriteria&) = default;
};

struct ReviewDecision {
    Verdict verdict = Verdict::Approve;
    std::string notes;
    std::string reviewer;
    ReviewCriteria criteria;
    /// Filled in when the decision is committed.
    std::string decided_at;

    friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

/// Throws Error(RejectWithoutNotes) for a reject with blank notes and
/// Error(InvalidArgument) for a blank reviewer.
void validate(const ReviewDecision& d);

struct Transition {
    JobState state = JobState::Uploaded;
    std::string at;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct LocalizationJob {
    std::string id;
    std::string src_locale;
    std::string tgt_locale;
    JobState state = JobState::Uploaded;
    std::vector<TextRegion> regions;
    std::vector<reimposition::TranslationUnit> units;
    /// Artifact name -> file name relative to the job directory.
    std::map<std::string, std::string> artifact_paths;
    std::vector<std::string> warnings;
    std::vector<Transition> timestamps;
    std::optional<ReviewDecision> decision;
    std::optional<std::string> decision_key;
    /// Job this one was cloned from for rework.
    std::optional<std::string> parent_id;
    /// Incremented on every committed manifest write.
    std::uint64_t version = 0;

    friend bool operator==(const LocalizationJob&, const LocalizationJob&) = default;
};

/// Checks the record invariants: artifacts match the state, the transition
/// log walks declared edges ending at `state`, terminal jobs carry their
/// decision. Throws Error(InvalidArgument) naming the first violation.
void validate(const LocalizationJob& job);

/// UTC, millisecond precision: 2024-05-01T12:00:00.000Z
std::string now_iso8601();

void to_json(nlohmann::json& j, const ReviewDecision& d);
void from_json(const nlohmann::json& j, ReviewDecision& d);
/// The manifest. Carries schema_version; from_json rejects other versions.
void to_json(nlohmann::json& j, const LocalizationJob& job);
void from_json(const nlohmann::json& j, LocalizationJob& job);

}  // namespace adloc::pipeline
