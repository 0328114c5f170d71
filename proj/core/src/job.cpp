#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/job.hpp"

namespace adloc::pipeline {
namespace {

constexpr std::array<JobState, 9> kStates{JobState::Uploaded,   JobState::Detected,  JobState::Annotated,
                                          JobState::Inpainted,  JobState::Translated, JobState::Reimposed,
                                          JobState::InReview,   JobState::Approved,  JobState::Rejected};

std::string squash(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

[[noreturn]] void violation(const std::string& what) {
    throw Error(ErrorCode::InvalidArgument, "job invariant violated: " + what);
}

}  // namespace

std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::Uploaded: return "Uploaded";
        case JobState::Detected: return "Detected";
        case JobState::Annotated: return "Annotated";
        case JobState::Inpainted: return "Inpainted";
        case JobState::Translated: return "Translated";
        case JobState::Reimposed: return "Reimposed";
        case JobState::InReview: return "InReview";
        case JobState::Approved: return "Approved";
        case JobState::Rejected: return "Rejected";
    }
    return "?";
}

JobState state_from_string(std::string_view s) {
    const std::string key = squash(s);
    for (JobState st : kStates) {
        if (squash(to_string(st)) == key) return st;
    }
    // Verb forms used by the CLI: --through reimpose.
    if (key == "detect" || key == "detection") return JobState::Detected;
    if (key == "annotate" || key == "annotations") return JobState::Annotated;
    if (key == "inpaint") return JobState::Inpainted;
    if (key == "translate") return JobState::Translated;
    if (key == "reimpose" || key == "review") return JobState::InReview;
    throw Error(ErrorCode::InvalidArgument, "unknown job state '" + std::string(s) + "'");
}

int rank(JobState s) {
    return s == JobState::Rejected ? rank(JobState::Approved) : static_cast<int>(s);
}

bool is_terminal(JobState s) { return s == JobState::Approved || s == JobState::Rejected; }

bool is_edge(JobState from, JobState to) {
    if (from == JobState::InReview) return is_terminal(to);
    if (is_terminal(from) || is_terminal(to)) return false;
    return rank(to) == rank(from) + 1;
}

JobState artifact_stage(std::string_view artifact) {
    if (artifact == kOriginal) return JobState::Uploaded;
    if (artifact == kMask || artifact == kBackground) return JobState::Inpainted;
    if (artifact == kLocalized) return JobState::Reimposed;
    throw Error(ErrorCode::NotFound, "unknown artifact '" + std::string(artifact) + "'");
}

std::vector<std::string> artifacts_for(JobState s) {
    std::vector<std::string> out;
    for (const char* name : {kOriginal, kMask, kBackground, kLocalized}) {
        if (rank(s) >= rank(artifact_stage(name))) out.emplace_back(name);
    }
    return out;
}

std::string_view to_string(Verdict v) { return v == Verdict::Approve ? "approve" : "reject"; }

Verdict verdict_from_string(std::string_view s) {
    const std::string key = squash(s);
    if (key == "approve" || key == "approved") return Verdict::Approve;
    if (key == "reject" || key == "rejected") return Verdict::Reject;
    throw Error(ErrorCode::InvalidArgument, "verdict must be approve or reject");
}

void validate(const ReviewDecision& d) {
    if (d.verdict == Verdict::Reject && blank(d.notes)) {
        throw Error(ErrorCode::RejectWithoutNotes, "a rejection needs notes");
    }
    if (blank(d.reviewer)) throw Error(ErrorCode::InvalidArgument, "decision needs a reviewer");
}

void validate(const LocalizationJob& job) {
    if (job.id.empty()) violation("empty id");
    if (job.timestamps.empty() || job.timestamps.front().state != JobState::Uploaded) {
        violation("transition log must start at Uploaded");
    }
    for (std::size_t i = 1; i < job.timestamps.size(); ++i) {
        const JobState a = job.timestamps[i - 1].state, b = job.timestamps[i].state;
        if (!is_edge(a, b)) violation(std::string(to_string(a)) + " -> " + std::string(to_string(b)));
    }
    if (job.timestamps.back().state != job.state) violation("transition log does not end at the job state");

    const auto expected = artifacts_for(job.state);
    if (job.artifact_paths.size() != expected.size()) violation("artifact set does not match state");
    for (const auto& name : expected) {
        if (!job.artifact_paths.contains(name)) violation("missing artifact " + name);
    }
    if (is_terminal(job.state) != job.decision.has_value()) violation("decision present iff terminal");
    if (job.decision) {
        const bool approved = job.decision->verdict == Verdict::Approve;
        if (approved != (job.state == JobState::Approved)) violation("decision verdict disagrees with state");
    }
    if (rank(job.state) < rank(JobState::Translated) && !job.units.empty()) violation("units before translation");
    for (const auto& r : job.regions) validate(r);
}

std::string now_iso8601() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t t = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

void to_json(nlohmann::json& j, const ReviewDecision& d) {
    j = {{"verdict", to_string(d.verdict)},
         {"notes", d.notes},
         {"reviewer", d.reviewer},
         {"criteria",
          {{"visual_coherence", d.criteria.visual_coherence},
           {"translation_accuracy", d.criteria.translation_accuracy},
           {"rendering_quality", d.criteria.rendering_quality}}},
         {"decided_at", d.decided_at}};
}

void from_json(const nlohmann::json& j, ReviewDecision& d) {
    try {
        d.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        d.notes = j.value("notes", "");
        d.reviewer = j.value("reviewer", "");
        d.decided_at = j.value("decided_at", "");
        d.criteria = {};
        if (j.contains("criteria")) {
            const auto& c = j["criteria"];
            d.criteria.visual_coherence = c.value("visual_coherence", false);
            d.criteria.translation_accuracy = c.value("translation_accuracy", false);
            d.criteria.rendering_quality = c.value("rendering_quality", false);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed decision: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const LocalizationJob& job) {
    j = nlohmann::json::object();
    j["schema_version"] = kSchemaVersion;
    j["id"] = job.id;
    j["version"] = job.version;
    j["src_locale"] = job.src_locale;
    j["tgt_locale"] = job.tgt_locale;
    j["state"] = to_string(job.state);
    j["regions"] = job.regions;
    j["units"] = job.units;
    j["artifact_paths"] = job.artifact_paths;
    j["warnings"] = job.warnings;
    auto& ts = j["timestamps"] = nlohmann::json::array();
    for (const auto& t : job.timestamps) ts.push_back({{"state", to_string(t.state)}, {"at", t.at}});
    j["decision"] = job.decision ? nlohmann::json(*job.decision) : nlohmann::json(nullptr);
    j["decision_key"] = job.decision_key ? nlohmann::json(*job.decision_key) : nlohmann::json(nullptr);
    j["parent_id"] = job.parent_id ? nlohmann::json(*job.parent_id) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, LocalizationJob& job) {
    try {
        const int schema = j.at("schema_version").get<int>();
        if (schema != kSchemaVersion) {
            throw Error(ErrorCode::InvalidArgument, "unsupported manifest schema_version " + std::to_string(schema));
        }
        job.id = j.at("id").get<std::string>();
        job.version = j.at("version").get<std::uint64_t>();
        job.src_locale = j.at("src_locale").get<std::string>();
        job.tgt_locale = j.at("tgt_locale").get<std::string>();
        job.state = state_from_string(j.at("state").get<std::string>());
        job.regions = j.at("regions").get<std::vector<TextRegion>>();
        job.units = j.at("units").get<std::vector<reimposition::TranslationUnit>>();
        job.artifact_paths = j.at("artifact_paths").get<std::map<std::string, std::string>>();
        job.warnings = j.at("warnings").get<std::vector<std::string>>();
        job.timestamps.clear();
        for (const auto& t : j.at("timestamps")) {
            job.timestamps.push_back({state_from_string(t.at("state").get<std::string>()), t.at("at").get<std::string>()});
        }
        job.decision.reset();
        if (!j.at("decision").is_null()) job.decision = j["decision"].get<ReviewDecision>();
        job.decision_key.reset();
        if (j.contains("decision_key") && !j["decision_key"].is_null()) job.decision_key = j["decision_key"].get<std::string>();
        job.parent_id.reset();
        if (j.contains("parent_id") && !j["parent_id"].is_null()) job.parent_id = j["parent_id"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed manifest: ") + e.what());
    }
}

}  // namespace adloc::pipeline
