#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

#include "adloc/backends.hpp"

namespace adloc::backends {

/// Exponential backoff: initial delay, doubling, multiplied by a uniform
/// factor in [1 - jitter, 1 + jitter].
struct RetryPolicy {
    int retries = 2;
    double initial_delay_seconds = 0.5;
    double jitter = 0.2;

    int max_attempts() const { return retries + 1; }
    /// Nominal (jitter-free) delay before attempt `attempt` (1-based, attempt >= 2).
    double nominal_delay(int attempt) const;
};

struct HttpRequest {
    std::string path;
    std::string body;
    std::string content_type;
    /// Multipart form parts; when non-empty, body/content_type are ignored.
    struct Part {
        std::string name;
        std::string content;
        std::string filename;
        std::string content_type;
    };
    std::vector<Part> parts;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string content_type;
};

/// Shared JSON-over-HTTP(S) transport for the live adapters: bearer auth,
/// per-attempt timeout, retry with backoff and a concurrent-request cap.
class HttpTransport {
public:
    explicit HttpTransport(const BackendConfig& config);
    ~HttpTransport();
    HttpTransport(const HttpTransport&) = delete;
    HttpTransport& operator=(const HttpTransport&) = delete;

    /// POSTs `request`, retrying on transport errors and 5xx answers.
    /// Throws BackendUnavailableError carrying the attempt count when the
    /// budget runs out, Error(MalformedResponse) on 4xx answers.
    HttpResponse post(const HttpRequest& request);

    const RetryPolicy& policy() const { return policy_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    RetryPolicy policy_;
};

class LiveTextDetector final : public TextDetector {
public:
    explicit LiveTextDetector(std::shared_ptr<HttpTransport> http) : http_(std::move(http)) {}
    std::vector<TextRegion> detect(const Raster& img) override;

private:
    std::shared_ptr<HttpTransport> http_;
};

class LiveInpainter final : public Inpainter {
public:
    explicit LiveInpainter(std::shared_ptr<HttpTransport> http) : http_(std::move(http)) {}
    Raster inpaint(const Raster& img, const BinaryMask& mask) override;

private:
    std::shared_ptr<HttpTransport> http_;
};

class LiveTranslator final : public Translator {
public:
    LiveTranslator(std::shared_ptr<HttpTransport> http, LocaleTable locales)
        : http_(std::move(http)), locales_(std::move(locales)) {}
    std::string translate(std::string_view text, std::string_view src, std::string_view tgt) override;

private:
    std::shared_ptr<HttpTransport> http_;
    LocaleTable locales_;
};

/// Sends the image with the target region outlined, the region id and the
/// rendered prompt; parses the structured reply.
class LiveStyleExtractor final : public StyleExtractor {
public:
    LiveStyleExtractor(std::shared_ptr<HttpTransport> http, std::string prompt_template)
        : http_(std::move(http)), prompt_template_(std::move(prompt_template)) {}
    StyleReport extract_style(const Raster& img, const TextRegion& region, std::string_view context) override;

private:
    std::shared_ptr<HttpTransport> http_;
    std::string prompt_template_;
};

class LiveFontClassifier final : public FontClassifier {
public:
    LiveFontClassifier(std::shared_ptr<HttpTransport> http, bool fallback_enabled, std::string fallback_family)
        : http_(std::move(http)), fallback_enabled_(fallback_enabled), fallback_family_(std::move(fallback_family)) {}
    FontPrediction classify_font(const Raster& patch) override;

private:
    std::shared_ptr<HttpTransport> http_;
    bool fallback_enabled_;
    std::string fallback_family_;
};

/// Substitutes {context} and {region_id} in a prompt template.
std::string render_prompt(std::string_view tmpl, std::string_view context, std::string_view region_id);

}  // namespace adloc::backends
