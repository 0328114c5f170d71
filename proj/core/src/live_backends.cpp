#include "adloc/live_backends.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "adloc/error.hpp"
#include "cv_bridge.hpp"

namespace adloc::backends {

double RetryPolicy::nominal_delay(int attempt) const {
    return initial_delay_seconds * std::pow(2.0, attempt - 2);
}

namespace {

struct ParsedEndpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

ParsedEndpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedEndpoint p;
    p.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        p.prefix = url.substr(path_start);
        while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
    }
    return p;
}

}  // namespace

struct HttpTransport::Impl {
    ParsedEndpoint endpoint;
    std::string token;
    double timeout_seconds;
    std::counting_semaphore<> slots;
    std::mutex rng_mutex;
    std::mt19937_64 rng{std::random_device{}()};

    Impl(const BackendConfig& c)
        : endpoint(split_endpoint(c.endpoint)),
          token(c.auth_token),
          timeout_seconds(c.timeout_seconds),
          slots(c.max_concurrent_requests) {}

    double jitter_factor(double jitter) {
        std::lock_guard lock(rng_mutex);
        return std::uniform_real_distribution<double>(1.0 - jitter, 1.0 + jitter)(rng);
    }
};

HttpTransport::HttpTransport(const BackendConfig& config) {
    validate(config);
    impl_ = std::make_unique<Impl>(config);
    policy_ = RetryPolicy{config.retries, config.backoff_initial_seconds, config.backoff_jitter};
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::post(const HttpRequest& request) {
    struct SlotGuard {
        std::counting_semaphore<>& s;
        explicit SlotGuard(std::counting_semaphore<>& sem) : s(sem) { s.acquire(); }
        ~SlotGuard() { s.release(); }
    } slot(impl_->slots);

    const auto timeout = std::chrono::duration<double>(impl_->timeout_seconds);
    const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    const std::string path = impl_->endpoint.prefix + request.path;
    std::string last_error = "no attempt made";

    for (int attempt = 1; attempt <= policy_.max_attempts(); ++attempt) {
        if (attempt > 1) {
            const double delay = policy_.nominal_delay(attempt) * impl_->jitter_factor(policy_.jitter);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(impl_->endpoint.origin);
        client.set_connection_timeout(timeout_us);
        client.set_read_timeout(timeout_us);
        client.set_write_timeout(timeout_us);
        if (!impl_->token.empty()) client.set_bearer_token_auth(impl_->token);

        httplib::Result res;
        if (!request.parts.empty()) {
            httplib::MultipartFormDataItems items;
            for (const auto& p : request.parts) items.push_back({p.name, p.content, p.filename, p.content_type});
            res = client.Post(path, items);
        } else {
            res = client.Post(path, request.body, request.content_type);
        }

        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) {
            throw Error(ErrorCode::MalformedResponse,
                        "backend rejected " + request.path + " with HTTP " + std::to_string(res->status));
        }
        return {res->status, res->body, res->get_header_value("Content-Type")};
    }
    throw BackendUnavailableError("backend " + impl_->endpoint.origin + path + " unavailable after " +
                                      std::to_string(policy_.max_attempts()) + " attempts: " + last_error,
                                  policy_.max_attempts());
}

namespace {

nlohmann::json parse_json_body(const HttpResponse& res) {
    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::MalformedResponse, "backend answered with invalid JSON");
    return doc;
}

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

std::vector<TextRegion> LiveTextDetector::detect(const Raster& img) {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
    const auto res = http_->post({"/v1/detect", as_string(encode_png(img)), "image/png", {}});
    const auto doc = parse_json_body(res);
    if (!doc.is_object() || !doc.contains("regions") || !doc["regions"].is_array()) {
        throw Error(ErrorCode::MalformedResponse, "detection reply lacks 'regions'");
    }
    std::vector<TextRegion> out;
    for (const auto& item : doc["regions"]) {
        TextRegion r;
        try {
            r = item.get<TextRegion>();
            r.category = Category::Translatable;
            validate(r);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedResponse, std::string("detection region rejected: ") + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedResponse, std::string("detection region rejected: ") + e.what());
        }
        if (r.id.empty()) r.id = "r" + std::to_string(out.size());
        out.push_back(std::move(r));
    }
    return out;
}

Raster LiveInpainter::inpaint(const Raster& img, const BinaryMask& mask) {
    if (!mask.matches(img)) throw Error(ErrorCode::DimensionMismatch, "mask does not match image");
    HttpRequest req;
    req.path = "/v1/inpaint";
    req.parts = {{"image", as_string(encode_png(img)), "image.png", "image/png"},
                 {"mask", as_string(encode_png(mask_to_raster(mask))), "mask.png", "image/png"}};
    const auto res = http_->post(req);
    const std::vector<std::uint8_t> bytes(res.body.begin(), res.body.end());
    Raster out;
    try {
        out = decode_image(bytes);
    } catch (const Error&) {
        throw Error(ErrorCode::MalformedResponse, "inpainting reply is not an image");
    }
    if (!out.same_size(img)) throw Error(ErrorCode::DimensionMismatch, "inpainting changed the image size");
    if (out.channels() != img.channels()) {
        cv::Mat converted;
        const int code = img.channels() == 1   ? (out.channels() == 4 ? cv::COLOR_RGBA2GRAY : cv::COLOR_RGB2GRAY)
                         : img.channels() == 3 ? (out.channels() == 4 ? cv::COLOR_RGBA2RGB : cv::COLOR_GRAY2RGB)
                                               : (out.channels() == 3 ? cv::COLOR_RGB2RGBA : cv::COLOR_GRAY2RGBA);
        cv::cvtColor(detail::view(out), converted, code);
        out = detail::from_mat(converted);
    }
    return out;
}

std::string LiveTranslator::translate(std::string_view text, std::string_view src, std::string_view tgt) {
    locales_.require(src, tgt);
    require_translatable_text(text);
    const nlohmann::json body{{"text", text}, {"from", src}, {"to", tgt}};
    const auto doc = parse_json_body(http_->post({"/v1/translate", body.dump(), "application/json", {}}));
    if (!doc.is_object() || !doc.contains("translation") || !doc["translation"].is_string()) {
        throw Error(ErrorCode::MalformedResponse, "translation reply lacks 'translation'");
    }
    return doc["translation"].get<std::string>();
}

std::string render_prompt(std::string_view tmpl, std::string_view context, std::string_view region_id) {
    std::string out(tmpl);
    auto replace_all = [&out](std::string_view key, std::string_view value) {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
            out.replace(pos, key.size(), value);
        }
    };
    replace_all("{context}", context);
    replace_all("{region_id}", region_id);
    return out;
}

StyleReport LiveStyleExtractor::extract_style(const Raster& img, const TextRegion& region, std::string_view context) {
    Raster annotated = img.channels() == 1 ? [&] {
        cv::Mat rgb;
        cv::cvtColor(detail::view(img), rgb, cv::COLOR_GRAY2RGB);
        return detail::from_mat(rgb);
    }() : img;
    {
        cv::Mat canvas = detail::view(annotated);
        std::vector<cv::Point> pts;
        for (const auto& p : region.quad.corners) {
            pts.emplace_back(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)));
        }
        cv::polylines(canvas, pts, true, cv::Scalar(255, 0, 255, 255), 2);
    }
    HttpRequest req;
    req.path = "/v1/style";
    req.parts = {{"image", as_string(encode_png(annotated)), "annotated.png", "image/png"},
                 {"region_id", region.id, "", ""},
                 {"quad", nlohmann::json(region.quad).dump(), "", "application/json"},
                 {"prompt", render_prompt(prompt_template_, context, region.id), "", ""}};
    const auto res = http_->post(req);
    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    // Either the structured object itself or a chat-style {"content": "..."} wrapper.
    if (!doc.is_discarded() && doc.is_object() && doc.contains("content") && doc["content"].is_string()) {
        return parse_style_reply(std::string_view(doc["content"].get_ref<const std::string&>()));
    }
    return parse_style_reply(std::string_view(res.body));
}

FontPrediction LiveFontClassifier::classify_font(const Raster& patch) {
    if (patch.empty()) throw Error(ErrorCode::InvalidArgument, "empty patch");
    try {
        const auto doc = parse_json_body(http_->post({"/v1/classify-font", as_string(encode_png(patch)), "image/png", {}}));
        if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string() || !doc.contains("p") ||
            !doc["p"].is_number()) {
            throw Error(ErrorCode::MalformedResponse, "font reply lacks 'family'/'p'");
        }
        const double p = doc["p"].get<double>();
        if (p < 0.0 || p > 1.0) throw Error(ErrorCode::MalformedResponse, "font confidence outside [0,1]");
        return {doc["family"].get<std::string>(), p, {}};
    } catch (const BackendUnavailableError& e) {
        if (!fallback_enabled_) throw;
        return {fallback_family_, 0.0, std::string("font classifier unavailable, using fallback: ") + e.what()};
    }
}

}  // namespace adloc::backends
