// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adloc/cli.hpp"
#include "adloc/config.hpp"
#include "adloc/error.hpp"
#include "adloc/evaluation.hpp"
#include "adloc/geometry.hpp"
#include "adloc/imaging.hpp"
#include "adloc/pipeline.hpp"
#include "adloc/reimposition.hpp"
#include "support.hpp"

using namespace adloc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

/// Thrown by a check to report failure with a reason.
struct Failed {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Failed{why};
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& body) {
    std::string detail;
    bool ok = false;
    try {
        detail = body();
        ok = true;
    } catch (const Failed& f) {
        detail = f.why;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " (" + detail + ")") << std::endl;
}

// --- font sizing ---------------------------------------------------------

/// Line-by-line transcription of the shrink loop.
reimposition::FontSizeEstimate sizing_oracle(double w, double h, int n_o, int n_t) {
    const double delta = 0.5;
    const double s_o = std::min(w, h);
    double s_t = s_o;
    const double s_min = 0.3 * s_o;
    double C = (w * h) / (s_t * s_t);
    if (n_t > n_o) {
        while (C < n_t && s_t > s_min) {
            s_t = s_t - delta;
            C = (w * h) / (s_t * s_t);
        }
        return {s_t, C < n_t};
    }
    return {s_t, false};
}

std::string sizing_equivalence() {
    const auto t0 = Clock::now();
    std::size_t cases = 0;
    for (int w = 5; w <= 200; w += 5) {
        for (int h = 5; h <= 200; h += 5) {
            const geometry::BoxDims dims{double(w), double(h)};
            for (int n_o = 1; n_o <= 100; ++n_o) {
                for (int n_t = 1; n_t <= 100; ++n_t) {
                    const auto got = reimposition::estimate_font_size(dims, n_o, n_t);
                    const auto want = sizing_oracle(w, h, n_o, n_t);
                    if (got != want) {
                        std::ostringstream os;
                        os << "w=" << w << " h=" << h << " n_o=" << n_o << " n_t=" << n_t << ": got " << got.size
                           << ", want " << want.size;
                        throw Failed{os.str()};
                    }
                    ++cases;
                }
            }
        }
    }
    // The corner-point entry point counts characters of the actual strings.
    for (int w = 5; w <= 200; w += 35) {
        for (int h = 5; h <= 200; h += 15) {
            for (int n_o = 1; n_o <= 100; n_o += 9) {
                for (int n_t = 1; n_t <= 100; n_t += 7) {
                    const auto got = reimposition::estimate_font_size(
                        geometry::Point{10, 20}, geometry::Point{10.0 + w, 20.0 + h}, std::string(n_o, 'a'),
                        std::string(n_t, 'b'));
                    require(got == sizing_oracle(w, h, n_o, n_t), "corner-point overload disagrees");
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    require(secs < 30.0, "took " + std::to_string(secs) + " s");
    std::ostringstream os;
    os << cases << " boxes, " << secs << " s";
    return os.str();
}

std::string sizing_properties() {
    std::size_t cases = 0;
    for (int w = 5; w <= 200; w += 5) {
        for (int h = 5; h <= 200; h += 5) {
            const double s_o = std::min(w, h);
            for (int n_o = 1; n_o <= 100; ++n_o) {
                for (int n_t = 1; n_t <= 100; ++n_t) {
                    const double s = reimposition::estimate_font_size({double(w), double(h)}, n_o, n_t).size;
                    if (n_t <= n_o) require(s == s_o, "n_t <= n_o changed the size");
                    const double k = (s_o - s) / 0.5;
                    require(k >= 0 && k == std::floor(k), "size " + std::to_string(s) + " is off the grid");
                    require(s > 0.3 * s_o - 0.5, "size " + std::to_string(s) + " below floor");
                    ++cases;
                }
            }
        }
    }
    // Non-integer boxes too.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> side(1.0, 300.0);
    std::uniform_int_distribution<int> chars(1, 400);
    for (int i = 0; i < 20000; ++i) {
        const double w = side(rng), h = side(rng);
        const int n_o = chars(rng), n_t = chars(rng);
        const double s_o = std::min(w, h);
        const double s = reimposition::estimate_font_size({w, h}, n_o, n_t).size;
        if (n_t <= n_o) require(s == s_o, "n_t <= n_o changed the size");
        const double k = (s_o - s) / 0.5;
        require(std::abs(k - std::round(k)) < 1e-9, "size off the grid");
        require(s > 0.3 * s_o - 0.5, "size below floor");
        ++cases;
    }
    return std::to_string(cases) + " cases";
}

// --- imaging -------------------------------------------------------------

std::string recombine_containment() {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> dim(1, 160);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    const int channels[] = {1, 3, 4};
    for (int i = 0; i < 100; ++i) {
        const int w = dim(rng), h = dim(rng), c = channels[i % 3];
        const Raster original = adloc::testing::random_raster(rng, w, h, c);
        const Raster inpainted = adloc::testing::random_raster(rng, w, h, c);
        const BinaryMask mask = adloc::testing::random_mask(rng, w, h, density(rng));
        const Raster out = imaging::recombine(original, inpainted, mask);
        require(out.width() == w && out.height() == h && out.channels() == c, "shape changed");
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Raster& want = mask.get(x, y) ? inpainted : original;
                for (int k = 0; k < c; ++k) {
                    if (out.at(x, y, k) != want.at(x, y, k)) {
                        throw Failed{"case " + std::to_string(i) + " pixel (" + std::to_string(x) + "," +
                                     std::to_string(y) + ")"};
                    }
                }
            }
        }
    }
    return "100 pairs";
}

std::string letterbox_round_trip() {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> dim(8, 1400);
    const int side = 512;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        int w = dim(rng), h = dim(rng);
        if (w == h) ++w;
        const Raster img = adloc::testing::gradient(w, h);
        const auto boxed = imaging::letterbox(img, side);
        require(boxed.raster.width() == side && boxed.raster.height() == side, "letterboxed size wrong");
        const Raster back = imaging::unletterbox(boxed.raster, boxed.transform);
        require(back.width() == w && back.height() == h && back.channels() == 3,
                "round trip of " + std::to_string(w) + "x" + std::to_string(h) + " changed size");
        double sum = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) sum += std::abs(int(back.at(x, y, c)) - int(img.at(x, y, c)));
        const double mae = sum / (double(w) * h * 3);
        worst = std::max(worst, mae);
        require(mae < 2.0, "MAE " + std::to_string(mae) + " for " + std::to_string(w) + "x" + std::to_string(h));
    }
    for (int i = 0; i < 5; ++i) {
        const Raster img = adloc::testing::random_raster(rng, side, side, 3);
        const auto boxed = imaging::letterbox(img, side);
        require(boxed.raster == img, "square input was altered");
        require(imaging::unletterbox(boxed.raster, boxed.transform) == img, "square round trip not bytewise");
    }
    std::ostringstream os;
    os << "50 sizes, worst MAE " << worst;
    return os.str();
}

// --- metrics -------------------------------------------------------------

std::size_t dp_distance(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[a.size()][b.size()];
}

std::string utf8(const std::u32string& s) {
    std::string out;
    for (char32_t c : s) {
        if (c < 0x80) {
            out += char(c);
        } else if (c < 0x800) {
            out += char(0xC0 | (c >> 6));
            out += char(0x80 | (c & 0x3F));
        } else {
            out += char(0xE0 | (c >> 12));
            out += char(0x80 | ((c >> 6) & 0x3F));
            out += char(0x80 | (c & 0x3F));
        }
    }
    return out;
}

std::u32string random_text(std::mt19937& rng) {
    static const std::u32string alphabet = U"abcde é€ ";
    std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, alphabet.size() - 1);
    std::u32string s(len(rng), U'a');
    for (auto& c : s) c = alphabet[pick(rng)];
    return s;
}

std::string metric_golden_values() {
    require(evaluation::levenshtein("kitten", "sitting") == 3, "levenshtein(kitten, sitting)");
    require(dp_distance(U"kitten", U"sitting") == 3, "oracle disagrees on kitten/sitting");
    require(std::abs(evaluation::wer("the cat sat", "the cat sit") - 1.0 / 3.0) < 1e-12, "wer");
    require(std::abs(evaluation::cer("hello", "hallo") - 0.2) < 1e-12, "cer");
    std::mt19937 rng(5);
    for (int i = 0; i < 5; ++i) {
        const Raster x = adloc::testing::random_raster(rng, 37 + i * 11, 29 + i * 7, i % 2 ? 1 : 3);
        require(std::abs(evaluation::ssim(x, x) - 1.0) <= 1e-9, "ssim(x, x) != 1");
    }
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_text(rng), b = random_text(rng), c = random_text(rng);
        const auto sa = utf8(a), sb = utf8(b), sc = utf8(c);
        const auto ab = evaluation::levenshtein(sa, sb);
        require(ab == dp_distance(a, b), "levenshtein disagrees with the DP oracle");
        require(ab == evaluation::levenshtein(sb, sa), "levenshtein not symmetric");
        require(evaluation::levenshtein(sa, sa) == 0, "levenshtein(a, a) != 0");
        require((ab == 0) == (a == b), "zero distance between different strings");
        require(evaluation::levenshtein(sa, sc) <= ab + evaluation::levenshtein(sb, sc), "triangle inequality");
        require(evaluation::f1_tokens(sa, sb) == evaluation::f1_tokens(sb, sa), "f1 not symmetric");
        if (!a.empty()) {
            require(std::abs(evaluation::cer(sa, sb) - double(ab) / a.size()) < 1e-12, "cer != lev/|ref|");
        }
    }
    return "1000 random triples";
}

// --- geometry ------------------------------------------------------------

std::string geometry_checks() {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coord(-500, 500), size(1, 300);
    for (int i = 0; i < 1000; ++i) {
        const double x = coord(rng), y = coord(rng);
        const auto q = geometry::axis_aligned_quad({x, y}, {x + size(rng), y + size(rng)});
        require(geometry::rotation_angle(q) == 0.0, "horizontal quad has nonzero raw angle");
        require(geometry::snapped_rotation_angle(q) == 0.0, "horizontal quad has nonzero angle");
    }

    const auto fonts = adloc::testing::test_fonts();
    const Raster base(320, 320, 3, 235);
    reimposition::TypographySpec spec;
    spec.family = "DejaVu Sans";
    spec.size = 30;
    spec.color = {20, 30, 140};
    double worst = 0.0;
    reimposition::PlacementCounters rotated_counters;
    for (double deg : {15.0, 30.0, 45.0, 60.0}) {
        const auto upright = geometry::axis_aligned_quad({100, 140}, {220, 180});
        const auto q = geometry::rotate(upright, deg * std::numbers::pi / 180.0, geometry::centroid(upright));
        const auto patch = reimposition::render_text_patch("Sale!", spec, geometry::upright_dims(q), fonts);
        const auto placed = reimposition::place_text(base, patch.rgba, patch.mask, q, &rotated_counters);
        const double d = geometry::distance(reimposition::mask_centroid(placed.glyphs), geometry::centroid(q));
        worst = std::max(worst, d);
        require(d <= 0.5, "centroid off by " + std::to_string(d) + " px at " + std::to_string(deg) + " deg");
    }
    require(rotated_counters.rotated == 4, "rotated path not taken for tilted quads");

    std::vector<reimposition::TranslationUnit> units;
    for (int i = 0; i < 5; ++i) {
        reimposition::TranslationUnit u;
        u.region = adloc::testing::make_region("h" + std::to_string(i), 10, 10 + 60 * i, 300, 50 + 60 * i);
        u.source_text = "Sale";
        u.target_text = "Soldes";
        u.typography = spec;
        units.push_back(u);
    }
    reimposition::PlacementCounters flat;
    reimposition::reimpose_all(base, units, fonts, {}, &flat);
    require(flat.rotated == 0, std::to_string(flat.rotated) + " rotations on horizontal quads");
    require(flat.anchored == units.size(), "not every horizontal unit anchored");
    std::ostringstream os;
    os << "worst centroid error " << worst << " px";
    return os.str();
}

// --- end to end ----------------------------------------------------------

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "adloc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), out, err);
    if (code != 0) std::cerr << err.str();
    if (out_text) *out_text = out.str();
    return code;
}

bool differs(const Raster& a, const Raster& b, int x, int y) {
    for (int c = 0; c < a.channels(); ++c)
        if (a.at(x, y, c) != b.at(x, y, c)) return true;
    return false;
}

std::string end_to_end() {
    adloc::testing::TempDir dir;
    const auto ad = adloc::testing::synthetic_ad();
    adloc::testing::write_pipeline_fixture(dir / "fixtures", ad.image, ad.regions);
    write_png(dir / "ad.png", ad.image);
    const std::string store = (dir / "store").string();

    const auto t0 = Clock::now();
    std::string out;
    require(cli({"--store", store, "ingest", "--image", (dir / "ad.png").string(), "--src", "en-US", "--tgt",
                 "fr-CA"},
                &out) == 0,
            "ingest failed");
    const std::string id = out.substr(0, out.find(' '));
    require(cli({"--store", store, "run", "--job", id, "--through", "InReview", "--backend", "mock", "--fixtures",
                 (dir / "fixtures").string(), "--auto-annotate"},
                &out) == 0,
            "run failed");
    const double secs = seconds_since(t0);
    require(secs < 10.0, "took " + std::to_string(secs) + " s");

    pipeline::JobStore js(dir / "store");
    const auto job = js.load(id);
    require(job.state == pipeline::JobState::InReview, "job ended in " + std::string(to_string(job.state)));
    require(job.units.size() == 2, "expected two translation units");
    const Raster original = js.read_artifact(job, pipeline::kOriginal);
    const Raster background = js.read_artifact(job, pipeline::kBackground);
    const Raster localized = js.read_artifact(job, pipeline::kLocalized);
    require(original == ad.image, "stored original differs from the upload");

    const BinaryMask text_mask = imaging::make_mask(original.width(), original.height(), job.regions);
    require(raster_to_mask(js.read_artifact(job, pipeline::kMask)) == text_mask, "stored mask is not the text mask");

    const FontSource fonts(default_font_dir(), "DejaVu Sans");
    const auto redo = reimposition::reimpose_all(background, job.units, fonts);
    require(redo.image == localized, "re-rendering the units does not reproduce the localized image");

    std::size_t erased = 0, drawn = 0;
    for (int y = 0; y < original.height(); ++y) {
        for (int x = 0; x < original.width(); ++x) {
            if (differs(background, original, x, y)) {
                require(text_mask.get(x, y), "background changed outside the dilated text mask");
                ++erased;
            }
            if (differs(localized, background, x, y)) {
                require(redo.glyphs.get(x, y), "localized changed outside the glyph masks");
                ++drawn;
            }
        }
    }
    require(erased > 0 && drawn > 0, "nothing was erased or drawn");
    const double s = evaluation::ssim(original, localized);
    require(s > 0.85, "SSIM " + std::to_string(s));
    std::ostringstream os;
    os << secs << " s, SSIM " << s;
    return os.str();
}

// --- crash safety --------------------------------------------------------

struct Crash {};

adloc::testing::SyntheticAd small_ad() {
    adloc::testing::SyntheticAd ad;
    ad.image = adloc::testing::gradient(200, 120);
    ad.regions = {adloc::testing::make_region("title", 20, 20, 180, 50, Category::Translatable, "New flavour"),
                  adloc::testing::make_region("brand", 20, 70, 90, 100, Category::Brand, "ACME"),
                  adloc::testing::make_region("cta", 100, 70, 180, 100, Category::Translatable, "Buy now")};
    return ad;
}

void full_flow(pipeline::Pipeline& pipe, const Raster& img) {
    const auto job = pipe.create_job(img, "en-US", "es-US");
    pipe.advance(job.id, pipeline::JobState::InReview, true);
    pipeline::ReviewDecision d;
    d.reviewer = "qa";
    pipe.submit_decision(job.id, d, "once");
}

/// Every job directory loads, validates and has readable artifacts; no temp
/// files survive recovery. Unfinished jobs can still be driven to the end.
void check_store(const fs::path& root, const fs::path& fixtures) {
    auto pipe = adloc::testing::pipeline_with(root, adloc::testing::mock_backends(fixtures));
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        for (const auto& f : fs::directory_iterator(entry.path())) {
            require(f.path().extension() != ".tmp", "temp file survived: " + f.path().string());
        }
        const std::string id = entry.path().filename().string();
        pipeline::LocalizationJob job;
        try {
            job = pipe.store().load(id);
        } catch (const Error& e) {
            throw Failed{"job " + id + " unreadable: " + e.what()};
        }
        try {
            pipeline::validate(job);
        } catch (const Error& e) {
            throw Failed{"job " + id + " invalid: " + e.what()};
        }
        for (const auto& [name, file] : job.artifact_paths) pipe.store().read_artifact(job, name);
        if (!pipeline::is_terminal(job.state)) {
            if (job.state != pipeline::JobState::InReview) pipe.advance(id, pipeline::JobState::InReview, true);
            pipeline::ReviewDecision d;
            d.reviewer = "qa";
            require(pipe.submit_decision(id, d).state == pipeline::JobState::Approved, "resumed job not approved");
        }
    }
}

std::string crash_safety() {
    adloc::testing::TempDir dir;
    const auto ad = small_ad();
    adloc::testing::write_pipeline_fixture(dir / "fixtures", ad.image, ad.regions);
    const fs::path root = dir / "store";

    std::size_t points = 0;
    {
        adloc::testing::TempDir probe;
        auto pipe = adloc::testing::pipeline_with(probe.path(), adloc::testing::mock_backends(dir / "fixtures"));
        pipe.store().set_fault_hook([&](std::string_view) { ++points; });
        full_flow(pipe, ad.image);
    }
    require(points > 0, "no interruption points reported");

    std::mt19937 rng(1337);
    std::uniform_int_distribution<std::size_t> pick(1, points);
    std::size_t crashed = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t at = pick(rng);
        {
            auto pipe = adloc::testing::pipeline_with(root, adloc::testing::mock_backends(dir / "fixtures"));
            std::size_t seen = 0;
            pipe.store().set_fault_hook([&](std::string_view) {
                if (++seen == at) throw Crash{};
            });
            try {
                full_flow(pipe, ad.image);
            } catch (const Crash&) {
                ++crashed;
            }
        }
        check_store(root, dir / "fixtures");
    }
    require(crashed == 200, "only " + std::to_string(crashed) + " runs were interrupted");
    return "200 interruptions over " + std::to_string(points) + " write points";
}

}  // namespace

int main() {
    criterion("font-size oracle equivalence", sizing_equivalence);
    criterion("font-size properties", sizing_properties);
    criterion("selective recombination containment", recombine_containment);
    criterion("letterbox round trip", letterbox_round_trip);
    criterion("metric golden values and properties", metric_golden_values);
    criterion("geometry and placement", geometry_checks);
    criterion("end-to-end mock run", end_to_end);
    criterion("crash safety", crash_safety);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
