#include "adloc/backends.hpp"

#include <cctype>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/live_backends.hpp"
#include "adloc/mock_backends.hpp"

namespace adloc::backends {

std::string_view to_string(Mode m) { return m == Mode::Live ? "live" : "mock"; }

Mode mode_from_string(std::string_view s) {
    if (s == "live") return Mode::Live;
    if (s == "mock") return Mode::Mock;
    throw Error(ErrorCode::InvalidArgument, "backend mode must be 'live' or 'mock'");
}

void validate(const BackendConfig& config) {
    if (config.retries < 0) throw Error(ErrorCode::InvalidArgument, "retries must be >= 0");
    if (!(config.timeout_seconds > 0.0)) throw Error(ErrorCode::InvalidArgument, "timeout must be > 0");
    if (config.max_concurrent_requests < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_concurrent_requests must be >= 1");
    }
    if (config.mode == Mode::Live && config.endpoint.empty()) {
        throw Error(ErrorCode::InvalidArgument, "live backends need an endpoint");
    }
}

std::string to_hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r & 0xFF, c.g & 0xFF, c.b & 0xFF);
    return buf;
}

Rgb parse_hex(std::string_view hex) {
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        return -1;
    };
    if (hex.size() != 7 || hex[0] != '#') {
        throw Error(ErrorCode::MalformedResponse, "hex colour must look like #RRGGBB");
    }
    int v[6];
    for (int i = 0; i < 6; ++i) {
        v[i] = nibble(hex[i + 1]);
        if (v[i] < 0) throw Error(ErrorCode::MalformedResponse, "hex colour has a non-hex digit");
    }
    return Rgb{v[0] * 16 + v[1], v[2] * 16 + v[3], v[4] * 16 + v[5]};
}

StyleReport parse_style_reply(const nlohmann::json& reply) {
    if (!reply.is_object()) throw Error(ErrorCode::MalformedResponse, "style reply is not an object");
    if (!reply.contains("hex") || !reply["hex"].is_string()) {
        throw Error(ErrorCode::MalformedResponse, "style reply lacks a string 'hex'");
    }
    const auto& rgb = reply.contains("rgb") ? reply["rgb"] : nlohmann::json();
    if (!rgb.is_array() || rgb.size() != 3) {
        throw Error(ErrorCode::MalformedResponse, "style reply lacks a 3-element 'rgb'");
    }
    int c[3];
    for (int i = 0; i < 3; ++i) {
        if (!rgb[i].is_number_integer()) throw Error(ErrorCode::MalformedResponse, "rgb components must be integers");
        c[i] = rgb[i].get<int>();
        if (c[i] < 0 || c[i] > 255) throw Error(ErrorCode::MalformedResponse, "rgb component outside 0-255");
    }
    auto flag = [&](const char* key) {
        if (!reply.contains(key)) return false;
        if (!reply[key].is_boolean()) throw Error(ErrorCode::MalformedResponse, std::string(key) + " must be boolean");
        return reply[key].get<bool>();
    };

    StyleReport s;
    s.hex = reply["hex"].get<std::string>();
    s.rgb = Rgb{c[0], c[1], c[2]};
    if (parse_hex(s.hex) != s.rgb) {
        throw Error(ErrorCode::InconsistentStyleReport, "hex " + s.hex + " does not match rgb " + to_hex(s.rgb));
    }
    s.hex = to_hex(s.rgb);
    s.color_name = reply.contains("name") && reply["name"].is_string() ? reply["name"].get<std::string>() : "";
    s.bold = flag("bold");
    s.italic = flag("italic");
    s.underline = flag("underline");
    return s;
}

StyleReport parse_style_reply(std::string_view reply_text) {
    auto parsed = nlohmann::json::parse(reply_text, nullptr, false);
    if (parsed.is_discarded()) {
        // LLM replies sometimes wrap the object in prose or code fences.
        const auto open = reply_text.find('{');
        const auto close = reply_text.rfind('}');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
            throw Error(ErrorCode::MalformedResponse, "style reply contains no JSON object");
        }
        parsed = nlohmann::json::parse(reply_text.substr(open, close - open + 1), nullptr, false);
        if (parsed.is_discarded()) throw Error(ErrorCode::MalformedResponse, "style reply JSON is invalid");
    }
    return parse_style_reply(parsed);
}

void to_json(nlohmann::json& j, const StyleReport& s) {
    j = nlohmann::json{{"name", s.color_name},
                       {"hex", s.hex},
                       {"rgb", {s.rgb.r, s.rgb.g, s.rgb.b}},
                       {"bold", s.bold},
                       {"italic", s.italic},
                       {"underline", s.underline}};
}

void require_translatable_text(std::string_view text) {
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) return;
    }
    throw Error(ErrorCode::InvalidArgument, "text to translate is empty");
}

BackendSet make_backends(const BackendConfig& config, const LocaleTable& locales) {
    validate(config);
    BackendSet set;
    if (config.mode == Mode::Mock) {
        set.detector = std::make_shared<MockTextDetector>(config.fixtures_dir);
        set.inpainter = std::make_shared<MockInpainter>();
        set.translator = std::make_shared<MockTranslator>(locales);
        set.style = std::make_shared<MockStyleExtractor>();
        set.fonts = std::make_shared<FallbackFontClassifier>(config.fallback_font_family);
        return set;
    }
    auto http = std::make_shared<HttpTransport>(config);
    set.detector = std::make_shared<LiveTextDetector>(http);
    set.inpainter = std::make_shared<LiveInpainter>(http);
    set.translator = std::make_shared<LiveTranslator>(http, locales);
    set.style = std::make_shared<LiveStyleExtractor>(http, config.style_prompt_template);
    set.fonts = std::make_shared<LiveFontClassifier>(http, config.font_fallback, config.fallback_font_family);
    return set;
}

}  // namespace adloc::backends
