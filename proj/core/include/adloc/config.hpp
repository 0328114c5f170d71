#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "adloc/backends.hpp"
#include "adloc/pipeline.hpp"
#include "adloc/region.hpp"

namespace adloc {

/// Compiled-in font directory (the DejaVu fonts on most Linux systems).
std::filesystem::path default_font_dir();

struct AppConfig {
    std::filesystem::path store = "adloc-store";
    std::string host = "127.0.0.1";
    int port = 8080;
    /// When set, the HTTP API requires "Authorization: Bearer <token>".
    std::string api_token;
    /// Jobs processed concurrently by `adloc run`.
    int parallelism = 1;

    std::filesystem::path font_dir = default_font_dir();
    std::string default_font = "DejaVu Sans";

    backends::BackendConfig backend;
    pipeline::PipelineOptions pipeline;
    LocaleTable locales = LocaleTable::defaults();
};

/// Throws Error(InvalidArgument) on out-of-range values.
void validate(const AppConfig& config);

/// Reads the keys present in `j` on top of the values already in `config`.
void merge_config(AppConfig& config, const nlohmann::json& j);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

/// ADLOC_STORE, ADLOC_PORT and ADLOC_BACKEND_MODE override the file.
void apply_env_overrides(AppConfig& config, const EnvLookup& env = process_env);

/// Defaults, then the JSON file (if any), then the environment; validated.
AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

/// Opens the store and builds backends and fonts for a pipeline.
pipeline::Pipeline open_pipeline(const AppConfig& config);

}  // namespace adloc
