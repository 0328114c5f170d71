#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adloc/backends.hpp"
#include "adloc/live_backends.hpp"
#include "adloc/raster.hpp"

namespace adloc::evaluation {

/// Unit-cost edit distance over any random-access sequences.
template <class Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Edit distance over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Splits on Unicode whitespace; case-sensitive.
std::vector<std::string> tokenize(std::string_view text);

/// Word-level edit distance / reference token count. Can exceed 1.
/// Throws Error(EmptyReference) when the reference has no tokens.
double wer(std::string_view ref, std::string_view hyp);

/// Character-level edit distance / reference length.
/// Throws Error(EmptyReference) for an empty reference.
double cer(std::string_view ref, std::string_view hyp);

/// Multiset token-overlap F1. Both empty -> 1, exactly one empty -> 0.
double f1_tokens(std::string_view ref, std::string_view hyp);

/// Lowercases ASCII letters and removes ASCII punctuation.
std::string normalize_text(std::string_view text);

struct TextOptions {
    bool normalize = false;
};

// ---------------------------------------------------------------------------

inline constexpr int kSsimWindow = 8;

/// Mean SSIM over all 8x8 windows (stride 1) of the grayscale images with
/// C1 = (0.01*255)^2 and C2 = (0.03*255)^2. Images narrower than the window
/// use one window spanning that axis. Throws Error(DimensionMismatch).
double ssim(const Raster& a, const Raster& b);

struct PerceptualScore {
    std::string metric_name;
    double value = 0.0;
    bool lower_is_better = false;
};

class PerceptualMetric {
public:
    virtual ~PerceptualMetric() = default;
    virtual PerceptualScore score(const Raster& a, const Raster& b) const = 0;
    virtual std::string name() const = 0;
    virtual bool lower_is_better() const = 0;
};

class SsimMetric final : public PerceptualMetric {
public:
    PerceptualScore score(const Raster& a, const Raster& b) const override;
    std::string name() const override { return "ssim"; }
    bool lower_is_better() const override { return false; }
};

/// A learned perceptual distance (e.g. LPIPS) served over HTTP:
/// POST <endpoint>/v1/perceptual with multipart parts "a" and "b",
/// answering {"value": <non-negative number>}.
class ExternalPerceptualMetric final : public PerceptualMetric {
public:
    ExternalPerceptualMetric(const backends::BackendConfig& config, std::string metric_name = "lpips");
    ~ExternalPerceptualMetric() override;
    PerceptualScore score(const Raster& a, const Raster& b) const override;
    std::string name() const override { return name_; }
    bool lower_is_better() const override { return true; }

private:
    std::shared_ptr<backends::HttpTransport> http_;
    std::string name_;
};

// ---------------------------------------------------------------------------

struct ItemScore {
    std::string id;
    std::optional<double> levenshtein;
    std::optional<double> levenshtein_normalized;
    std::optional<double> wer;
    std::optional<double> cer;
    std::optional<double> f1;
    std::optional<double> perceptual;

    friend bool operator==(const ItemScore&, const ItemScore&) = default;
};

struct Means {
    std::optional<double> levenshtein;
    std::optional<double> levenshtein_normalized;
    std::optional<double> wer;
    std::optional<double> cer;
    std::optional<double> f1;
    std::optional<double> perceptual;

    friend bool operator==(const Means&, const Means&) = default;
};

struct CorpusReport {
    std::size_t text_pairs = 0;
    std::size_t image_pairs = 0;
    std::string perceptual_metric;
    bool perceptual_lower_is_better = false;
    std::vector<ItemScore> items;
    Means means;

    friend bool operator==(const CorpusReport&, const CorpusReport&) = default;
};

using TextPair = std::pair<std::string, std::string>;
using ImagePair = std::pair<Raster, Raster>;

/// Scores every pair (text items first, then image items) and averages each
/// metric over the items that have it. Work is spread over `parallelism`
/// threads; item order and means do not depend on it.
CorpusReport evaluate_corpus(std::span<const TextPair> pairs, std::span<const ImagePair> image_pairs,
                             const PerceptualMetric& metric, const TextOptions& options = {},
                             int parallelism = 1);

void to_json(nlohmann::json& j, const CorpusReport& r);
void from_json(const nlohmann::json& j, CorpusReport& r);
void write_report(const std::filesystem::path& path, const CorpusReport& r);
CorpusReport read_report(const std::filesystem::path& path);

}  // namespace adloc::evaluation
