#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "adloc/error.hpp"
#include "adloc/pipeline.hpp"

namespace adloc::service {

struct ApiError {
    std::string code;
    std::string message;
    std::optional<std::string> job_id;
};

void to_json(nlohmann::json& j, const ApiError& e);

/// HTTP status for an error code: 400 bad input, 401, 404, 409 conflicts and
/// invalid transitions, 502/503 for backends, 500 otherwise.
int http_status(ErrorCode code);

/// The job as the API returns it: the manifest fields plus "artifacts", a
/// map from artifact name to its download URL.
nlohmann::json job_view(const pipeline::LocalizationJob& job);

/// Side-by-side review payload: original and localized URLs, mask URL,
/// units, warnings and any decision.
nlohmann::json review_view(const pipeline::LocalizationJob& job);

struct ServiceOptions {
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8080;
    /// Empty disables authentication.
    std::string api_token;
};

/// Routes:
///   GET  /jobs                       POST /jobs (multipart: image, src, tgt)
///   GET  /jobs/{id}                  GET  /jobs/{id}/image/{stage}
///   PUT  /jobs/{id}/annotations      POST /jobs/{id}/advance {"target": state}
///   GET  /jobs/{id}/review           POST /jobs/{id}/decision (Idempotency-Key header)
/// Errors are {"code", "message", "job_id"}.
class Service {
public:
    Service(pipeline::Pipeline& pipeline, ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket; returns the bound port. Throws
    /// Error(PortInUse).
    int bind();
    /// Serves until stop(); bind() first.
    void run();
    /// bind() and run() on a background thread.
    int start();
    /// Stops accepting, lets in-flight requests finish, joins.
    void stop();

    int port() const noexcept { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace adloc::service
