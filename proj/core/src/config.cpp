#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "adloc/config.hpp"
#include "adloc/error.hpp"

#ifndef ADLOC_DEFAULT_FONT_DIR
#define ADLOC_DEFAULT_FONT_DIR "/usr/share/fonts/truetype/dejavu"
#endif

namespace adloc {
namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

void read_path(const nlohmann::json& j, const char* key, std::filesystem::path& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<std::string>();
}

}  // namespace

std::filesystem::path default_font_dir() { return ADLOC_DEFAULT_FONT_DIR; }

void validate(const AppConfig& c) {
    if (c.store.empty()) throw Error(ErrorCode::InvalidArgument, "store path is empty");
    if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::InvalidArgument, "port must be in [0, 65535]");
    if (c.parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be >= 1");
    backends::validate(c.backend);
    reimposition::validate(c.pipeline.sizing);
    if (c.pipeline.letterbox_side < 16) throw Error(ErrorCode::InvalidArgument, "letterbox_side must be >= 16");
    if (c.pipeline.mask_dilation < 0) throw Error(ErrorCode::InvalidArgument, "mask_dilation must be >= 0");
    if (c.pipeline.preprocess.median_kernel < 1 || c.pipeline.preprocess.median_kernel % 2 == 0) {
        throw Error(ErrorCode::InvalidArgument, "median_kernel must be odd and positive");
    }
    if (c.pipeline.preprocess.max_side < 1) throw Error(ErrorCode::InvalidArgument, "max_side must be >= 1");
}

void merge_config(AppConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    try {
        read_path(j, "store", c.store);
        read(j, "host", c.host);
        read(j, "port", c.port);
        read(j, "api_token", c.api_token);
        read(j, "parallelism", c.parallelism);

        if (j.contains("fonts")) {
            const auto& f = j["fonts"];
            read_path(f, "dir", c.font_dir);
            read(f, "default_face", c.default_font);
        }
        if (j.contains("backend")) {
            const auto& b = j["backend"];
            if (b.contains("mode")) c.backend.mode = backends::mode_from_string(b["mode"].get<std::string>());
            read(b, "endpoint", c.backend.endpoint);
            read(b, "auth_token", c.backend.auth_token);
            read(b, "timeout_seconds", c.backend.timeout_seconds);
            read(b, "retries", c.backend.retries);
            read(b, "backoff_initial_seconds", c.backend.backoff_initial_seconds);
            read(b, "backoff_jitter", c.backend.backoff_jitter);
            read(b, "max_concurrent_requests", c.backend.max_concurrent_requests);
            read_path(b, "fixtures_dir", c.backend.fixtures_dir);
            read(b, "style_prompt_template", c.backend.style_prompt_template);
            read(b, "style_context", c.backend.style_context);
            read(b, "font_fallback", c.backend.font_fallback);
            read(b, "fallback_font_family", c.backend.fallback_font_family);
        }
        if (j.contains("imaging")) {
            const auto& im = j["imaging"];
            read(im, "median_kernel", c.pipeline.preprocess.median_kernel);
            read(im, "clahe_clip_limit", c.pipeline.preprocess.clahe_clip_limit);
            read(im, "clahe_tile_grid", c.pipeline.preprocess.clahe_tile_grid);
            read(im, "max_side", c.pipeline.preprocess.max_side);
            read(im, "letterbox_side", c.pipeline.letterbox_side);
            read(im, "mask_dilation", c.pipeline.mask_dilation);
        }
        if (j.contains("sizing")) {
            read(j["sizing"], "step", c.pipeline.sizing.step);
            read(j["sizing"], "floor_ratio", c.pipeline.sizing.floor_ratio);
        }
        if (j.contains("locale_pairs")) {
            LocaleTable table;
            for (const auto& p : j["locale_pairs"]) {
                table.add({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
            }
            c.locales = std::move(table);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad config: ") + e.what());
    }
    c.pipeline.style_context = c.backend.style_context;
    c.pipeline.fallback_font_family = c.backend.fallback_font_family;
}

std::optional<std::string> process_env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

void apply_env_overrides(AppConfig& c, const EnvLookup& env) {
    if (auto v = env("ADLOC_STORE")) c.store = *v;
    if (auto v = env("ADLOC_PORT")) {
        std::size_t used = 0;
        int port = -1;
        try {
            port = std::stoi(*v, &used);
        } catch (const std::exception&) {
        }
        if (used != v->size() || port < 0) throw Error(ErrorCode::InvalidArgument, "ADLOC_PORT is not a port: " + *v);
        c.port = port;
    }
    if (auto v = env("ADLOC_BACKEND_MODE")) c.backend.mode = backends::mode_from_string(*v);
}

AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    AppConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw Error(ErrorCode::NotFound, "cannot open config " + file->string());
        auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, "config " + file->string() + " is not JSON");
        merge_config(c, doc);
    }
    apply_env_overrides(c, env);
    validate(c);
    return c;
}

pipeline::Pipeline open_pipeline(const AppConfig& config) {
    validate(config);
    auto store = std::make_shared<pipeline::JobStore>(config.store);
    FontSource fonts(config.font_dir, config.default_font);
    auto options = config.pipeline;
    options.style_context = config.backend.style_context;
    options.fallback_font_family = config.backend.fallback_font_family;
    return pipeline::Pipeline(std::move(store), backends::make_backends(config.backend, config.locales),
                              std::move(fonts), config.locales, std::move(options));
}

}  // namespace adloc
