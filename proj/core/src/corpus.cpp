#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/evaluation.hpp"
#include "adloc/live_backends.hpp"
#include "adloc/region.hpp"

namespace adloc::evaluation {
namespace {

ItemScore score_text_pair(std::size_t index, const TextPair& pair, const TextOptions& options) {
    const std::string ref = options.normalize ? normalize_text(pair.first) : pair.first;
    const std::string hyp = options.normalize ? normalize_text(pair.second) : pair.second;
    ItemScore item;
    item.id = "text-" + std::to_string(index);
    const auto lev = static_cast<double>(levenshtein(ref, hyp));
    item.levenshtein = lev;
    const std::size_t ref_len = utf8_length(ref);
    if (ref_len > 0) {
        item.levenshtein_normalized = lev / static_cast<double>(ref_len);
        item.cer = cer(ref, hyp);
    }
    if (!tokenize(ref).empty()) item.wer = wer(ref, hyp);
    item.f1 = f1_tokens(ref, hyp);
    return item;
}

template <class Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < std::min(workers, count); ++t) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::optional<double> mean_of(const std::vector<ItemScore>& items, std::optional<double> ItemScore::*field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& item : items) {
        if (const auto& v = item.*field) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

void put(nlohmann::json& j, const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> get(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

CorpusReport evaluate_corpus(std::span<const TextPair> pairs, std::span<const ImagePair> image_pairs,
                             const PerceptualMetric& metric, const TextOptions& options, int parallelism) {
    CorpusReport report;
    report.text_pairs = pairs.size();
    report.image_pairs = image_pairs.size();
    report.perceptual_metric = metric.name();
    report.perceptual_lower_is_better = metric.lower_is_better();
    report.items.resize(pairs.size() + image_pairs.size());

    parallel_for(report.items.size(), parallelism, [&](std::size_t i) {
        if (i < pairs.size()) {
            report.items[i] = score_text_pair(i, pairs[i], options);
            return;
        }
        const std::size_t k = i - pairs.size();
        ItemScore item;
        item.id = "image-" + std::to_string(k);
        item.perceptual = metric.score(image_pairs[k].first, image_pairs[k].second).value;
        report.items[i] = std::move(item);
    });

    report.means.levenshtein = mean_of(report.items, &ItemScore::levenshtein);
    report.means.levenshtein_normalized = mean_of(report.items, &ItemScore::levenshtein_normalized);
    report.means.wer = mean_of(report.items, &ItemScore::wer);
    report.means.cer = mean_of(report.items, &ItemScore::cer);
    report.means.f1 = mean_of(report.items, &ItemScore::f1);
    report.means.perceptual = mean_of(report.items, &ItemScore::perceptual);
    return report;
}

void to_json(nlohmann::json& j, const CorpusReport& r) {
    j = nlohmann::json::object();
    j["counts"] = {{"text_pairs", r.text_pairs}, {"image_pairs", r.image_pairs}};
    j["perceptual_metric"] = {{"name", r.perceptual_metric}, {"lower_is_better", r.perceptual_lower_is_better}};
    j["items"] = nlohmann::json::array();
    for (const auto& item : r.items) {
        nlohmann::json ji{{"id", item.id}};
        put(ji, "levenshtein", item.levenshtein);
        put(ji, "levenshtein_normalized", item.levenshtein_normalized);
        put(ji, "wer", item.wer);
        put(ji, "cer", item.cer);
        put(ji, "f1", item.f1);
        put(ji, "perceptual", item.perceptual);
        j["items"].push_back(std::move(ji));
    }
    nlohmann::json means = nlohmann::json::object();
    auto put_mean = [&means](const char* key, const std::optional<double>& v) {
        if (v) means[key] = *v;
    };
    put_mean("levenshtein", r.means.levenshtein);
    put_mean("levenshtein_normalized", r.means.levenshtein_normalized);
    put_mean("wer", r.means.wer);
    put_mean("cer", r.means.cer);
    put_mean("f1", r.means.f1);
    put_mean("perceptual", r.means.perceptual);
    j["means"] = std::move(means);
}

void from_json(const nlohmann::json& j, CorpusReport& r) {
    try {
        r.text_pairs = j.at("counts").at("text_pairs").get<std::size_t>();
        r.image_pairs = j.at("counts").at("image_pairs").get<std::size_t>();
        r.perceptual_metric = j.at("perceptual_metric").at("name").get<std::string>();
        r.perceptual_lower_is_better = j.at("perceptual_metric").at("lower_is_better").get<bool>();
        r.items.clear();
        for (const auto& ji : j.at("items")) {
            ItemScore item;
            item.id = ji.at("id").get<std::string>();
            item.levenshtein = get(ji, "levenshtein");
            item.levenshtein_normalized = get(ji, "levenshtein_normalized");
            item.wer = get(ji, "wer");
            item.cer = get(ji, "cer");
            item.f1 = get(ji, "f1");
            item.perceptual = get(ji, "perceptual");
            r.items.push_back(std::move(item));
        }
        const auto& m = j.at("means");
        r.means = Means{get(m, "levenshtein"), get(m, "levenshtein_normalized"), get(m, "wer"),
                        get(m, "cer"),         get(m, "f1"),                     get(m, "perceptual")};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
    }
}

void write_report(const std::filesystem::path& path, const CorpusReport& r) {
    std::ofstream out(path, std::ios::trunc);
    out << nlohmann::json(r).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write report " + path.string());
}

CorpusReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open report " + path.string());
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, "report is not JSON");
    return doc.get<CorpusReport>();
}

ExternalPerceptualMetric::ExternalPerceptualMetric(const backends::BackendConfig& config, std::string metric_name)
    : http_(std::make_shared<backends::HttpTransport>(config)), name_(std::move(metric_name)) {}

ExternalPerceptualMetric::~ExternalPerceptualMetric() = default;

PerceptualScore ExternalPerceptualMetric::score(const Raster& a, const Raster& b) const {
    if (!a.same_size(b)) throw Error(ErrorCode::DimensionMismatch, "perceptual inputs differ in size");
    const auto pa = encode_png(a), pb = encode_png(b);
    backends::HttpRequest req;
    req.path = "/v1/perceptual";
    req.parts = {{"a", std::string(pa.begin(), pa.end()), "a.png", "image/png"},
                 {"b", std::string(pb.begin(), pb.end()), "b.png", "image/png"}};
    const auto res = http_->post(req);
    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("value") || !doc["value"].is_number()) {
        throw Error(ErrorCode::MalformedResponse, "perceptual reply lacks a numeric 'value'");
    }
    const double v = doc["value"].get<double>();
    if (v < 0.0) throw Error(ErrorCode::MalformedResponse, "perceptual distance must be >= 0");
    return {name_, v, true};
}

}  // namespace adloc::evaluation
