#include "adloc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adloc/config.hpp"
#include "adloc/error.hpp"
#include "adloc/evaluation.hpp"
#include "adloc/service.hpp"

namespace adloc::cli {
namespace {

struct Common {
    std::string config_file;
    std::string store;
    bool json = false;
};

struct IngestArgs {
    std::string image, src, tgt;
};

struct RunArgs {
    std::vector<std::string> jobs;
    std::string through = "InReview";
    std::string backend;
    std::string fixtures;
    bool auto_annotate = false;
    int parallelism = 0;
};

struct EvalArgs {
    std::string refs, hyps, out;
    std::vector<std::string> ref_images, hyp_images;
    std::string perceptual = "ssim";
    bool normalize = false;
    int parallelism = 1;
};

struct ServeArgs {
    std::string host;
    int port = -1;
};

AppConfig configure(const Common& common) {
    std::optional<std::filesystem::path> file;
    if (!common.config_file.empty()) file = common.config_file;
    AppConfig config = load_config(file);
    if (!common.store.empty()) config.store = common.store;
    return config;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

void print_job(std::ostream& out, const pipeline::LocalizationJob& job) {
    out << job.id << ' ' << to_string(job.state) << '\n';
}

int do_ingest(const Common& common, const IngestArgs& args, std::ostream& out) {
    auto pipe = open_pipeline(configure(common));
    std::ifstream in(args.image, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + args.image);
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto job = pipe.create_job(bytes, args.src, args.tgt);
    if (common.json) {
        out << service::job_view(job).dump(2) << '\n';
    } else {
        print_job(out, job);
    }
    return kOk;
}

int do_run(const Common& common, const RunArgs& args, std::ostream& out, std::ostream& err) {
    AppConfig config = configure(common);
    if (!args.backend.empty()) config.backend.mode = backends::mode_from_string(args.backend);
    if (!args.fixtures.empty()) config.backend.fixtures_dir = args.fixtures;
    if (args.parallelism > 0) config.parallelism = args.parallelism;
    validate(config);
    const auto target = pipeline::state_from_string(args.through);
    auto pipe = open_pipeline(config);

    std::vector<std::optional<pipeline::LocalizationJob>> results(args.jobs.size());
    std::vector<std::string> failures(args.jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < args.jobs.size(); i = next++) {
            try {
                results[i] = pipe.advance(args.jobs[i], target, args.auto_annotate);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), args.jobs.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    int code = kOk;
    nlohmann::json report = nlohmann::json::array();
    for (std::size_t i = 0; i < args.jobs.size(); ++i) {
        if (results[i]) {
            if (common.json) {
                report.push_back(service::job_view(*results[i]));
            } else {
                print_job(out, *results[i]);
            }
            for (const auto& w : results[i]->warnings) err << "adloc: " << args.jobs[i] << ": warning: " << w << '\n';
        } else {
            code = kDomainError;
            err << "adloc: " << args.jobs[i] << ": " << failures[i] << '\n';
            if (common.json) report.push_back({{"id", args.jobs[i]}, {"error", failures[i]}});
        }
    }
    if (common.json) out << report.dump(2) << '\n';
    return code;
}

int do_eval(const Common& common, const EvalArgs& args, std::ostream& out) {
    if (args.ref_images.size() != args.hyp_images.size()) {
        throw Error(ErrorCode::InvalidArgument, "--ref-image and --hyp-image must be given the same number of times");
    }
    std::vector<evaluation::TextPair> pairs;
    if (!args.refs.empty() || !args.hyps.empty()) {
        if (args.refs.empty() || args.hyps.empty()) throw Error(ErrorCode::InvalidArgument, "--refs needs --hyps");
        const auto refs = read_lines(args.refs);
        const auto hyps = read_lines(args.hyps);
        if (refs.size() != hyps.size()) {
            throw Error(ErrorCode::InvalidArgument, "refs has " + std::to_string(refs.size()) + " lines, hyps has " +
                                                        std::to_string(hyps.size()));
        }
        for (std::size_t i = 0; i < refs.size(); ++i) pairs.emplace_back(refs[i], hyps[i]);
    }
    std::vector<evaluation::ImagePair> images;
    for (std::size_t i = 0; i < args.ref_images.size(); ++i) {
        images.emplace_back(read_image(args.ref_images[i]), read_image(args.hyp_images[i]));
    }

    std::unique_ptr<evaluation::PerceptualMetric> metric;
    if (args.perceptual == "ssim") {
        metric = std::make_unique<evaluation::SsimMetric>();
    } else {
        const AppConfig config = configure(common);
        metric = std::make_unique<evaluation::ExternalPerceptualMetric>(config.backend, args.perceptual);
    }
    const auto report = evaluation::evaluate_corpus(pairs, images, *metric, {args.normalize}, args.parallelism);
    if (!args.out.empty()) evaluation::write_report(args.out, report);

    if (common.json) {
        out << nlohmann::json(report).dump(2) << '\n';
    } else {
        const nlohmann::json means = nlohmann::json(report)["means"];
        for (const auto& [k, v] : means.items()) out << k << ' ' << v.get<double>() << '\n';
    }
    return kOk;
}

int do_serve(const Common& common, const ServeArgs& args, std::ostream& out, std::ostream& err) {
    AppConfig config = configure(common);
    if (!args.host.empty()) config.host = args.host;
    if (args.port >= 0) config.port = args.port;
    validate(config);
    auto pipe = open_pipeline(config);

    // Block the shutdown signals before any thread exists so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    service::Service svc(pipe, {config.host, config.port, config.api_token});
    const int port = svc.start();
    if (common.json) {
        out << nlohmann::json{{"host", config.host}, {"port", port}, {"store", config.store.string()}}.dump() << '\n';
    } else {
        out << "listening on " << config.host << ':' << port << '\n';
    }
    out.flush();
    err << "adloc: serving store " << config.store.string() << '\n';

    int sig = 0;
    sigwait(&signals, &sig);
    err << "adloc: shutting down\n";
    svc.stop();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ad localization: detect, erase, translate and re-render advertising text.", "adloc"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--config", common.config_file, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--store", common.store, "Job store directory (overrides config and ADLOC_STORE)");
    app.add_flag("--json", common.json, "Machine-readable JSON on standard output");

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Create a job from an image");
    ingest_cmd->add_option("--image", ingest.image, "Input image")->required();
    ingest_cmd->add_option("--src", ingest.src, "Source locale, e.g. en-US")->required();
    ingest_cmd->add_option("--tgt", ingest.tgt, "Target locale, e.g. fr-CA")->required();

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Advance jobs through the machine stages");
    run_cmd->add_option("--job", run_args.jobs, "Job id (repeatable)")->required();
    run_cmd->add_option("--through", run_args.through, "Last stage: detect, annotate, inpaint, translate, reimpose");
    run_cmd->add_option("--backend", run_args.backend, "mock or live")->check(CLI::IsMember({"mock", "live"}));
    run_cmd->add_option("--fixtures", run_args.fixtures, "Detection sidecar directory for the mock backend");
    run_cmd->add_flag("--auto-annotate", run_args.auto_annotate, "Accept detected regions as annotations");
    run_cmd->add_option("--parallelism", run_args.parallelism, "Jobs processed at once")->check(CLI::PositiveNumber);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score hypotheses against references");
    eval_cmd->add_option("--refs", eval.refs, "Reference lines (UTF-8)");
    eval_cmd->add_option("--hyps", eval.hyps, "Hypothesis lines, aligned with --refs");
    eval_cmd->add_option("--ref-image", eval.ref_images, "Reference image (repeatable)");
    eval_cmd->add_option("--hyp-image", eval.hyp_images, "Hypothesis image, paired by order (repeatable)");
    eval_cmd->add_option("--perceptual", eval.perceptual, "ssim, or a metric name served by the live backend");
    eval_cmd->add_option("--out", eval.out, "Write the JSON report here");
    eval_cmd->add_flag("--normalize", eval.normalize, "Lowercase and strip punctuation first");
    eval_cmd->add_option("--parallelism", eval.parallelism, "Worker threads")->check(CLI::PositiveNumber);

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
    serve_cmd->add_option("--host", serve.host, "Bind address");
    serve_cmd->add_option("--port", serve.port, "Port (0 picks one)")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "adloc: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    try {
        if (*ingest_cmd) return do_ingest(common, ingest, out);
        if (*run_cmd) return do_run(common, run_args, out, err);
        if (*eval_cmd) return do_eval(common, eval, out);
        if (*serve_cmd) return do_serve(common, serve, out, err);
    } catch (const Error& e) {
        err << "adloc: " << to_string(e.code()) << ": " << e.what() << '\n';
        if (common.json) out << nlohmann::json{{"code", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        err << "adloc: " << e.what() << '\n';
        return kDomainError;
    }
    return kUsageError;
}

}  // namespace adloc::cli
