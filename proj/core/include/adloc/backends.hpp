#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adloc/raster.hpp"
#include "adloc/region.hpp"

namespace adloc::backends {

enum class Mode { Live, Mock };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

inline constexpr const char* kDefaultStylePrompt =
    "You are shown an advertisement for {context}. The text region {region_id} is outlined. "
    "Reply with JSON only: {\"name\": <color name>, \"hex\": \"#RRGGBB\", \"rgb\": [r, g, b], "
    "\"bold\": bool, \"italic\": bool, \"underline\": bool}.";

struct BackendConfig {
    Mode mode = Mode::Mock;
    std::string endpoint;
    std::string auth_token;
    double timeout_seconds = 30.0;
    int retries = 2;
    double backoff_initial_seconds = 0.5;
    double backoff_jitter = 0.2;
    int max_concurrent_requests = 4;

    /// Mock text detection reads <fixtures_dir>/<content_hash>.json sidecars.
    std::filesystem::path fixtures_dir;
    /// Placeholders: {context}, {region_id}.
    std::string style_prompt_template = kDefaultStylePrompt;
    std::string style_context = "a consumer product";

    bool font_fallback = true;
    std::string fallback_font_family = "default-sans";
};

/// Throws Error(InvalidArgument) when retries < 0, timeout <= 0 or a live
/// config has no endpoint.
void validate(const BackendConfig& config);

struct Rgb {
    int r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

std::string to_hex(Rgb c);
/// Parses "#RRGGBB" (case-insensitive). Throws Error(MalformedResponse).
Rgb parse_hex(std::string_view hex);

struct StyleReport {
    std::string color_name;
    std::string hex;
    Rgb rgb;
    bool bold = false;
    bool italic = false;
    bool underline = false;

    friend bool operator==(const StyleReport&, const StyleReport&) = default;
};

/// Parses the structured colour/style reply. Accepts a JSON object or text
/// with one embedded. Throws Error(MalformedResponse) for missing or
/// ill-typed fields and Error(InconsistentStyleReport) when hex and rgb
/// disagree.
StyleReport parse_style_reply(const nlohmann::json& reply);
StyleReport parse_style_reply(std::string_view reply_text);

void to_json(nlohmann::json& j, const StyleReport& s);

struct FontPrediction {
    std::string family;
    double confidence = 0.0;
    /// Set when the prediction came from the fallback path.
    std::string warning;
};

class TextDetector {
public:
    virtual ~TextDetector() = default;
    virtual std::vector<TextRegion> detect(const Raster& img) = 0;
};

class Inpainter {
public:
    virtual ~Inpainter() = default;
    virtual Raster inpaint(const Raster& img, const BinaryMask& mask) = 0;
};

class Translator {
public:
    virtual ~Translator() = default;
    virtual std::string translate(std::string_view text, std::string_view src, std::string_view tgt) = 0;
};

class StyleExtractor {
public:
    virtual ~StyleExtractor() = default;
    virtual StyleReport extract_style(const Raster& img, const TextRegion& region,
                                      std::string_view context) = 0;
};

class FontClassifier {
public:
    virtual ~FontClassifier() = default;
    virtual FontPrediction classify_font(const Raster& patch) = 0;
};

struct BackendSet {
    std::shared_ptr<TextDetector> detector;
    std::shared_ptr<Inpainter> inpainter;
    std::shared_ptr<Translator> translator;
    std::shared_ptr<StyleExtractor> style;
    std::shared_ptr<FontClassifier> fonts;
};

/// Builds all five clients for config.mode.
BackendSet make_backends(const BackendConfig& config, const LocaleTable& locales);

/// Throws Error(InvalidArgument) when text is empty after trimming whitespace.
void require_translatable_text(std::string_view text);

}  // namespace adloc::backends
