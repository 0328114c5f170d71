#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "adloc/service.hpp"

namespace adloc::service {
namespace {

constexpr const char* kJobPattern = R"(/jobs/([A-Za-z0-9_-]+))";

std::string image_url(const std::string& id, const std::string& artifact) {
    return "/jobs/" + id + "/image/" + artifact;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                const std::optional<std::string>& job_id) {
    send_json(res, http_status(code), ApiError{std::string(to_string(code)), message, job_id});
}

nlohmann::json parse_body(const httplib::Request& req) {
    auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, "request body is not JSON");
    return doc;
}

std::string form_field(const httplib::Request& req, const char* name) {
    if (req.has_file(name)) return req.get_file_value(name).content;
    if (req.has_param(name)) return req.get_param_value(name);
    throw Error(ErrorCode::InvalidArgument, std::string("missing form field '") + name + "'");
}

std::vector<TextRegion> parse_regions(const nlohmann::json& regions) {
    if (!regions.is_array()) throw Error(ErrorCode::InvalidArgument, "regions must be an array");
    try {
        return regions.get<std::vector<TextRegion>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed region: ") + e.what());
    }
}

}  // namespace

void to_json(nlohmann::json& j, const ApiError& e) {
    j = {{"code", e.code}, {"message", e.message}, {"job_id", e.job_id ? nlohmann::json(*e.job_id) : nlohmann::json(nullptr)}};
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::DegenerateBox:
        case ErrorCode::DegenerateQuad:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::UnsupportedPair:
        case ErrorCode::InvalidCategory:
        case ErrorCode::RejectWithoutNotes:
        case ErrorCode::UndecodableImage:
        case ErrorCode::EmptyReference:
            return 400;
        case ErrorCode::Unauthorized: return 401;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::InvalidTransition:
        case ErrorCode::Conflict:
            return 409;
        case ErrorCode::MalformedResponse:
        case ErrorCode::InconsistentStyleReport:
            return 502;
        case ErrorCode::BackendUnavailable: return 503;
        case ErrorCode::FontUnresolvable:
        case ErrorCode::StoreUnreadable:
        case ErrorCode::PortInUse:
        case ErrorCode::IoError:
            return 500;
    }
    return 500;
}

nlohmann::json job_view(const pipeline::LocalizationJob& job) {
    nlohmann::json j = job;
    j.erase("schema_version");
    nlohmann::json artifacts = nlohmann::json::object();
    for (const auto& [name, file] : job.artifact_paths) artifacts[name] = image_url(job.id, name);
    j["artifacts"] = std::move(artifacts);
    return j;
}

nlohmann::json review_view(const pipeline::LocalizationJob& job) {
    auto url = [&](const char* name) {
        return job.artifact_paths.contains(name) ? nlohmann::json(image_url(job.id, name)) : nlohmann::json(nullptr);
    };
    return {{"job_id", job.id},
            {"state", to_string(job.state)},
            {"src_locale", job.src_locale},
            {"tgt_locale", job.tgt_locale},
            {"original", url(pipeline::kOriginal)},
            {"localized", url(pipeline::kLocalized)},
            {"mask", url(pipeline::kMask)},
            {"units", job.units},
            {"warnings", job.warnings},
            {"decision", job.decision ? nlohmann::json(*job.decision) : nlohmann::json(nullptr)},
            {"version", job.version}};
}

struct Service::Impl {
    pipeline::Pipeline& pipeline;
    ServiceOptions options;
    httplib::Server server;
    std::thread worker;
    bool bound = false;

    Impl(pipeline::Pipeline& p, ServiceOptions o) : pipeline(p), options(std::move(o)) {
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        routes();
    }

    /// Runs `fn`, turning domain errors into ApiError responses.
    template <class Fn>
    void guarded(httplib::Response& res, const std::optional<std::string>& job_id, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            send_error(res, e.code(), e.what(), job_id);
        } catch (const std::exception& e) {
            send_error(res, ErrorCode::IoError, e.what(), job_id);
        }
    }

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (options.api_token.empty()) return httplib::Server::HandlerResponse::Unhandled;
            if (req.get_header_value("Authorization") == "Bearer " + options.api_token) {
                return httplib::Server::HandlerResponse::Unhandled;
            }
            send_error(res, ErrorCode::Unauthorized, "missing or wrong bearer token", std::nullopt);
            return httplib::Server::HandlerResponse::Handled;
        });

        server.Get("/jobs", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, std::nullopt, [&] {
                nlohmann::json out = nlohmann::json::array();
                for (const auto& job : pipeline.list()) out.push_back(job_view(job));
                send_json(res, 200, out);
            });
        });

        server.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, std::nullopt, [&] {
                if (!req.has_file("image")) throw Error(ErrorCode::InvalidArgument, "missing multipart part 'image'");
                const auto& content = req.get_file_value("image").content;
                const auto job = pipeline.create_job(
                    std::span(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()),
                    form_field(req, "src"), form_field(req, "tgt"));
                res.set_header("Location", "/jobs/" + job.id);
                send_json(res, 201, job_view(job));
            });
        });

        server.Get(kJobPattern, [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] { send_json(res, 200, job_view(pipeline.get(id))); });
        });

        server.Get(std::string(kJobPattern) + "/image/([a-z]+)", [this](const httplib::Request& req,
                                                                           httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] {
                const auto job = pipeline.get(id);
                const auto bytes = pipeline.store().read_artifact_bytes(job, req.matches[2].str());
                res.status = 200;
                res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
            });
        });

        server.Put(std::string(kJobPattern) + "/annotations", [this](const httplib::Request& req,
                                                                    httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] {
                const auto body = parse_body(req);
                std::optional<std::uint64_t> version;
                std::vector<TextRegion> regions;
                if (body.is_array()) {
                    regions = parse_regions(body);
                } else {
                    if (!body.is_object() || !body.contains("regions")) {
                        throw Error(ErrorCode::InvalidArgument, "expected {\"regions\": [...]}");
                    }
                    regions = parse_regions(body["regions"]);
                    if (body.contains("version") && !body["version"].is_null()) {
                        if (!body["version"].is_number_unsigned()) {
                            throw Error(ErrorCode::InvalidArgument, "version must be a non-negative integer");
                        }
                        version = body["version"].get<std::uint64_t>();
                    }
                }
                send_json(res, 200, job_view(pipeline.submit_annotations(id, std::move(regions), version)));
            });
        });

        server.Post(std::string(kJobPattern) + "/advance", [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] {
                const auto body = parse_body(req);
                if (!body.is_object() || !body.contains("target") || !body["target"].is_string()) {
                    throw Error(ErrorCode::InvalidArgument, "expected {\"target\": <state>}");
                }
                const auto target = pipeline::state_from_string(body["target"].get<std::string>());
                send_json(res, 200, job_view(pipeline.advance(id, target)));
            });
        });

        server.Get(std::string(kJobPattern) + "/review", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] { send_json(res, 200, review_view(pipeline.get(id))); });
        });

        server.Post(std::string(kJobPattern) + "/decision", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, id, [&] {
                const auto body = parse_body(req);
                auto decision = body.get<pipeline::ReviewDecision>();
                std::optional<std::string> key;
                if (req.has_header("Idempotency-Key")) key = req.get_header_value("Idempotency-Key");
                send_json(res, 200, job_view(pipeline.submit_decision(id, std::move(decision), key)));
            });
        });
    }
};

Service::Service(pipeline::Pipeline& pipeline, ServiceOptions options)
    : impl_(std::make_unique<Impl>(pipeline, std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->bound) return port_;
    const auto& o = impl_->options;
    if (o.port == 0) {
        port_ = impl_->server.bind_to_any_port(o.host);
        if (port_ < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + o.host);
    } else {
        if (!impl_->server.bind_to_port(o.host, o.port)) {
            throw Error(ErrorCode::PortInUse, "cannot bind " + o.host + ":" + std::to_string(o.port));
        }
        port_ = o.port;
    }
    impl_->bound = true;
    return port_;
}

void Service::run() {
    bind();
    impl_->server.listen_after_bind();
}

int Service::start() {
    const int p = bind();
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return p;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace adloc::service
