#include <atomic>
#include <chrono>
#include <future>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/evaluation.hpp"
#include "adloc/live_backends.hpp"
#include "support.hpp"

using namespace adloc;
using namespace adloc::backends;
using namespace std::chrono_literals;

namespace {

/// An HTTP server on an ephemeral localhost port for the duration of a test.
class StubServer {
public:
    StubServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& operator*() { return server_; }
    httplib::Server* operator->() { return &server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

BackendConfig live_config(const std::string& endpoint) {
    BackendConfig c;
    c.mode = Mode::Live;
    c.endpoint = endpoint;
    c.timeout_seconds = 2.0;
    c.retries = 2;
    c.backoff_initial_seconds = 0.01;
    return c;
}

using Clock = std::chrono::steady_clock;

}  // namespace

TEST(RetryPolicy, DoublesFromInitialDelay) {
    RetryPolicy p{3, 0.5, 0.2};
    EXPECT_EQ(p.max_attempts(), 4);
    EXPECT_DOUBLE_EQ(p.nominal_delay(2), 0.5);
    EXPECT_DOUBLE_EQ(p.nominal_delay(3), 1.0);
    EXPECT_DOUBLE_EQ(p.nominal_delay(4), 2.0);
}

TEST(LiveConfig, Validation) {
    BackendConfig c = live_config("");
    EXPECT_THROW(validate(c), Error);
    c = live_config("http://x");
    c.retries = -1;
    EXPECT_THROW(validate(c), Error);
    c = live_config("http://x");
    c.timeout_seconds = 0;
    EXPECT_THROW(validate(c), Error);
    EXPECT_NO_THROW(validate(live_config("http://x")));
}

TEST(HttpTransport, ExhaustedRetriesReportAttemptCount) {
    StubServer stub;
    std::atomic<int> hits{0};
    stub->Post("/v1/translate", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
    });
    LiveTranslator t(std::make_shared<HttpTransport>(live_config(stub.url())), LocaleTable::defaults());
    try {
        t.translate("Sale", "en-US", "fr-CA");
        FAIL();
    } catch (const BackendUnavailableError& e) {
        EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
        EXPECT_EQ(e.attempts(), 3);
    }
    EXPECT_EQ(hits.load(), 3);
}

TEST(HttpTransport, RecoversAfterTransientFailure) {
    StubServer stub;
    std::atomic<int> hits{0};
    stub->Post("/v1/translate", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 502;
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        EXPECT_EQ(body["from"], "en-US");
        EXPECT_EQ(body["to"], "fr-CA");
        res.set_content(nlohmann::json{{"translation", "Solde"}}.dump(), "application/json");
    });
    LiveTranslator t(std::make_shared<HttpTransport>(live_config(stub.url())), LocaleTable::defaults());
    EXPECT_EQ(t.translate("Sale", "en-US", "fr-CA"), "Solde");
    EXPECT_EQ(hits.load(), 3);
}

TEST(HttpTransport, ClientErrorsAreNotRetried) {
    StubServer stub;
    std::atomic<int> hits{0};
    stub->Post("/v1/translate", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 422;
    });
    LiveTranslator t(std::make_shared<HttpTransport>(live_config(stub.url())), LocaleTable::defaults());
    try {
        t.translate("Sale", "en-US", "fr-CA");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedResponse);
    }
    EXPECT_EQ(hits.load(), 1);
}

TEST(HttpTransport, SendsBearerTokenAndPrefix) {
    StubServer stub;
    std::string auth;
    stub->Post("/api/v1/translate", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"translation": "ok"})", "application/json");
    });
    BackendConfig c = live_config(stub.url() + "/api/");
    c.auth_token = "s3cret";
    LiveTranslator t(std::make_shared<HttpTransport>(c), LocaleTable::defaults());
    EXPECT_EQ(t.translate("Sale", "en-US", "fr-CA"), "ok");
    EXPECT_EQ(auth, "Bearer s3cret");
}

TEST(HttpTransport, UnreachableEndpointIsUnavailable) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    BackendConfig c = live_config("http://127.0.0.1:" + std::to_string(port));
    c.retries = 1;
    LiveTranslator t(std::make_shared<HttpTransport>(c), LocaleTable::defaults());
    try {
        t.translate("Sale", "en-US", "fr-CA");
        FAIL();
    } catch (const BackendUnavailableError& e) {
        EXPECT_EQ(e.attempts(), 2);
    }
}

TEST(HttpTransport, WallTimeStaysWithinBudget) {
    StubServer stub;
    stub->Post("/v1/translate", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(600ms);
        res.set_content(R"({"translation": "late"})", "application/json");
    });
    BackendConfig c = live_config(stub.url());
    c.timeout_seconds = 0.15;
    c.retries = 2;
    c.backoff_initial_seconds = 0.02;
    LiveTranslator t(std::make_shared<HttpTransport>(c), LocaleTable::defaults());
    const auto start = Clock::now();
    EXPECT_THROW(t.translate("Sale", "en-US", "fr-CA"), BackendUnavailableError);
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    // Every attempt is bounded by the timeout; the backoff adds 0.02 + 0.04 (+20%).
    const double budget = (c.retries + 1) * c.timeout_seconds + 0.06 * 1.2 + 0.5;
    EXPECT_LT(elapsed, budget);
}

TEST(HttpTransport, ConcurrentRequestsAreCapped) {
    StubServer stub;
    std::atomic<int> in_flight{0}, peak{0};
    stub->Post("/v1/translate", [&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(60ms);
        --in_flight;
        res.set_content(R"({"translation": "x"})", "application/json");
    });
    BackendConfig c = live_config(stub.url());
    c.max_concurrent_requests = 2;
    auto http = std::make_shared<HttpTransport>(c);
    LiveTranslator t(http, LocaleTable::defaults());
    std::vector<std::future<std::string>> calls;
    for (int i = 0; i < 6; ++i) {
        calls.push_back(std::async(std::launch::async, [&] { return t.translate("Sale", "en-US", "fr-CA"); }));
    }
    for (auto& f : calls) EXPECT_EQ(f.get(), "x");
    EXPECT_LE(peak.load(), 2);
    EXPECT_GE(peak.load(), 1);
}

TEST(LiveTranslator, ChecksPairBeforeCalling) {
    StubServer stub;
    std::atomic<int> hits{0};
    stub->Post("/v1/translate", [&](const httplib::Request&, httplib::Response&) { ++hits; });
    LiveTranslator t(std::make_shared<HttpTransport>(live_config(stub.url())), LocaleTable::defaults());
    EXPECT_THROW(t.translate("Sale", "en-US", "ja-JP"), Error);
    EXPECT_THROW(t.translate("  ", "en-US", "fr-CA"), Error);
    EXPECT_EQ(hits.load(), 0);
}

TEST(LiveFonts, PassesPredictionThrough) {
    StubServer stub;
    stub->Post("/v1/classify-font", [](const httplib::Request& req, httplib::Response& res) {
        EXPECT_EQ(req.get_header_value("Content-Type"), "image/png");
        res.set_content(R"({"family": "Roboto", "p": 0.93})", "application/json");
    });
    LiveFontClassifier fonts(std::make_shared<HttpTransport>(live_config(stub.url())), true, "default-sans");
    const auto p = fonts.classify_font(Raster(10, 10, 3, 0));
    EXPECT_EQ(p.family, "Roboto");
    EXPECT_DOUBLE_EQ(p.confidence, 0.93);
    EXPECT_TRUE(p.warning.empty());
}

TEST(LiveFonts, FallsBackWhenUnavailable) {
    StubServer stub;
    stub->Post("/v1/classify-font", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    BackendConfig c = live_config(stub.url());
    c.retries = 0;
    LiveFontClassifier fonts(std::make_shared<HttpTransport>(c), true, "default-sans");
    const auto p = fonts.classify_font(Raster(10, 10, 3, 0));
    EXPECT_EQ(p.family, "default-sans");
    EXPECT_EQ(p.confidence, 0.0);
    EXPECT_FALSE(p.warning.empty());

    LiveFontClassifier strict(std::make_shared<HttpTransport>(c), false, "default-sans");
    EXPECT_THROW(strict.classify_font(Raster(10, 10, 3, 0)), BackendUnavailableError);
}

TEST(LiveFonts, OutOfRangeConfidenceIsMalformed) {
    StubServer stub;
    stub->Post("/v1/classify-font", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"family": "Roboto", "p": 1.5})", "application/json");
    });
    LiveFontClassifier fonts(std::make_shared<HttpTransport>(live_config(stub.url())), true, "default-sans");
    EXPECT_THROW(fonts.classify_font(Raster(10, 10, 3, 0)), Error);
}

TEST(LiveStyle, SendsPromptAndParsesReply) {
    StubServer stub;
    std::string prompt, region_id;
    stub->Post("/v1/style", [&](const httplib::Request& req, httplib::Response& res) {
        prompt = req.get_file_value("prompt").content;
        region_id = req.get_file_value("region_id").content;
        EXPECT_TRUE(req.has_file("image"));
        res.set_content(
            nlohmann::json{{"content", R"({"name": "Dark Blue", "hex": "#1E3A8A", "rgb": [30, 58, 138]})"}}.dump(),
            "application/json");
    });
    LiveStyleExtractor style(std::make_shared<HttpTransport>(live_config(stub.url())),
                             "Ad for {context}; region {region_id}.");
    const auto s = style.extract_style(Raster(40, 40, 3, 255), adloc::testing::make_region("headline", 5, 5, 35, 20),
                                       "running shoes");
    EXPECT_EQ(s.rgb, (Rgb{30, 58, 138}));
    EXPECT_EQ(prompt, "Ad for running shoes; region headline.");
    EXPECT_EQ(region_id, "headline");
}

TEST(LiveStyle, InconsistentReplyIsRejected) {
    StubServer stub;
    stub->Post("/v1/style", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"hex": "#FF0000", "rgb": [0, 0, 255]})", "application/json");
    });
    LiveStyleExtractor style(std::make_shared<HttpTransport>(live_config(stub.url())), kDefaultStylePrompt);
    try {
        style.extract_style(Raster(40, 40, 3, 255), adloc::testing::make_region("r", 5, 5, 35, 20), "x");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InconsistentStyleReport);
    }
}

TEST(LiveDetector, ParsesRegions) {
    StubServer stub;
    stub->Post("/v1/detect", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            R"({"regions": [{"quad": [10,10,90,10,90,30,10,30], "text": "SALE", "confidence": 0.8}]})",
            "application/json");
    });
    LiveTextDetector det(std::make_shared<HttpTransport>(live_config(stub.url())));
    const auto regions = det.detect(Raster(100, 40, 1, 255));
    ASSERT_EQ(regions.size(), 1u);
    EXPECT_EQ(regions[0].text, "SALE");
    EXPECT_EQ(regions[0].id, "r0");
    EXPECT_EQ(regions[0].quad, geometry::axis_aligned_quad({10, 10}, {90, 30}));
}

TEST(LiveInpainter, ReturnsDecodedImage) {
    StubServer stub;
    stub->Post("/v1/inpaint", [](const httplib::Request& req, httplib::Response& res) {
        const auto& mask = req.get_file_value("mask").content;
        const Raster m = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(mask.data()), mask.size()));
        EXPECT_EQ(m.channels(), 1);
        const auto png = encode_png(Raster(m.width(), m.height(), 3, 42));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
    LiveInpainter inp(std::make_shared<HttpTransport>(live_config(stub.url())));
    EXPECT_EQ(inp.inpaint(Raster(12, 8, 3, 0), BinaryMask(12, 8, true)), Raster(12, 8, 3, 42));
    EXPECT_THROW(inp.inpaint(Raster(12, 8, 3, 0), BinaryMask(8, 8)), Error);
}

TEST(ExternalPerceptual, ReportsDistance) {
    StubServer stub;
    stub->Post("/v1/perceptual", [](const httplib::Request& req, httplib::Response& res) {
        EXPECT_TRUE(req.has_file("a"));
        EXPECT_TRUE(req.has_file("b"));
        res.set_content(R"({"value": 0.067})", "application/json");
    });
    evaluation::ExternalPerceptualMetric lpips(live_config(stub.url()));
    const auto score = lpips.score(Raster(8, 8, 3, 0), Raster(8, 8, 3, 1));
    EXPECT_EQ(score.metric_name, "lpips");
    EXPECT_DOUBLE_EQ(score.value, 0.067);
    EXPECT_TRUE(score.lower_is_better);
}
