#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/geometry.hpp"

using namespace adloc;
using namespace adloc::geometry;

namespace {

constexpr double kPi = std::numbers::pi;

Quad quad_from_top_edge(Point a, Point b, double height = 5.0) {
    // Left-hand normal in screen coordinates points "down" the text.
    const double len = distance(a, b);
    const Point n{-(b.y - a.y) / len * height, (b.x - a.x) / len * height};
    return Quad{{a, b, b + n, a + n}};
}

/// Independent oracle: angle of (dx, dy) folded into (-pi/2, pi/2].
double angle_oracle(double dx, double dy) {
    if (dx == 0.0) return kPi / 2;
    double a = std::atan(dy / dx);
    if (a <= -kPi / 2) a += kPi;
    return a;
}

}  // namespace

TEST(BoxDims, AbsoluteDifferences) {
    EXPECT_EQ(box_dims({0, 0}, {100, 20}), (BoxDims{100, 20}));
    EXPECT_EQ(box_dims({3.5, 7.0}, {103.5, 27.0}), (BoxDims{100, 20}));
}

TEST(BoxDims, ZeroExtentIsDegenerate) {
    try {
        box_dims({10, 5}, {10, 25});
        FAIL() << "expected degenerate-box";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateBox);
    }
    EXPECT_THROW(box_dims({0, 5}, {10, 5}), Error);
}

TEST(BoxDims, SymmetricInArguments) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-500, 500);
    for (int i = 0; i < 500; ++i) {
        const Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
        EXPECT_EQ(box_dims(a, b), box_dims(b, a));
    }
}

TEST(RotationAngle, Examples) {
    EXPECT_EQ(rotation_angle(quad_from_top_edge({0, 0}, {10, 0})), 0.0);
    EXPECT_DOUBLE_EQ(rotation_angle(quad_from_top_edge({0, 0}, {10, 10})), kPi / 4);
    EXPECT_DOUBLE_EQ(rotation_angle(quad_from_top_edge({0, 0}, {0, 10})), kPi / 2);
}

TEST(RotationAngle, AxisAlignedIsExactlyZero) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int i = 0; i < 200; ++i) {
        const Point a{u(rng), u(rng)};
        const Quad q = axis_aligned_quad(a, a + Point{1 + u(rng), 1 + u(rng)});
        EXPECT_EQ(rotation_angle(q), 0.0);
        EXPECT_TRUE(is_horizontal(q));
    }
}

TEST(RotationAngle, MatchesQuadrantAwareOracle) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 2000; ++i) {
        const double dx = u(rng), dy = u(rng);
        if (std::hypot(dx, dy) < 1e-3) continue;
        const double got = rotation_angle(quad_from_top_edge({0, 0}, {dx, dy}));
        EXPECT_GT(got, -kPi / 2);
        EXPECT_LE(got, kPi / 2);
        EXPECT_NEAR(got, angle_oracle(dx, dy), 1e-12);
    }
}

TEST(RotationAngle, TranslationInvariant) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 500; ++i) {
        const Quad q = quad_from_top_edge({u(rng), u(rng)}, {u(rng), u(rng)});
        const Point t{u(rng), u(rng)};
        EXPECT_NEAR(rotation_angle(translate(q, t)), rotation_angle(q), 1e-9);
    }
}

TEST(RotationAngle, RotatingAHorizontalQuadAddsTheAngle) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> phi(-kPi / 2 + 1e-6, kPi / 2 - 1e-6);
    for (int i = 0; i < 500; ++i) {
        const Quad q = axis_aligned_quad({10, 10}, {60, 30});
        const double p = phi(rng);
        EXPECT_NEAR(rotation_angle(rotate(q, p, centroid(q))), wrap_half_turn(p), 1e-9);
    }
}

TEST(RotationAngle, SnapsBelowHalfDegree) {
    const double small = 0.49 * kPi / 180;
    const double big = 0.51 * kPi / 180;
    EXPECT_EQ(snapped_rotation_angle(quad_from_top_edge({0, 0}, {100 * std::cos(small), 100 * std::sin(small)})), 0.0);
    EXPECT_NE(snapped_rotation_angle(quad_from_top_edge({0, 0}, {100 * std::cos(big), 100 * std::sin(big)})), 0.0);
}

TEST(WrapHalfTurn, Range) {
    EXPECT_DOUBLE_EQ(wrap_half_turn(kPi / 2), kPi / 2);
    EXPECT_DOUBLE_EQ(wrap_half_turn(-kPi / 2), kPi / 2);
    EXPECT_NEAR(wrap_half_turn(kPi), 0.0, 1e-15);
    EXPECT_NEAR(wrap_half_turn(3 * kPi / 4), -kPi / 4, 1e-15);
}

TEST(Centroid, Examples) {
    EXPECT_EQ(centroid(Quad{{Point{0, 0}, {1, 0}, {1, 1}, {0, 1}}}), (Point{0.5, 0.5}));
    EXPECT_EQ(centroid(Quad{{Point{0, 0}, {4, 0}, {4, 2}, {0, 2}}}), (Point{2, 1}));
    const Quad sq = axis_aligned_quad({0, 0}, {10, 10});
    const Point c = centroid(rotate(sq, kPi / 4, {5, 5}));
    EXPECT_NEAR(c.x, 5.0, 1e-12);
    EXPECT_NEAR(c.y, 5.0, 1e-12);
}

TEST(Centroid, CommutesWithTranslation) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 500; ++i) {
        Quad q;
        for (auto& p : q.corners) p = {u(rng), u(rng)};
        const Point t{u(rng), u(rng)};
        const Point a = centroid(translate(q, t)), b = centroid(q) + t;
        EXPECT_NEAR(a.x, b.x, 1e-9);
        EXPECT_NEAR(a.y, b.y, 1e-9);
    }
}

TEST(Quad, CornerOrderSurvivesTransforms) {
    const Quad q = axis_aligned_quad({10, 20}, {50, 40});
    const Quad r = rotate(translate(q, {3, 4}), 0.3, {0, 0});
    EXPECT_GT(signed_area(q), 0.0);
    EXPECT_NEAR(signed_area(r), signed_area(q), 1e-9);
    EXPECT_FALSE(is_degenerate(r));
    EXPECT_TRUE(is_degenerate(Quad{{Point{0, 0}, {1, 1}, {2, 2}, {3, 3}}}));
}

TEST(Quad, UprightDimsOfRotatedBox) {
    const Quad q = axis_aligned_quad({0, 0}, {80, 20});
    const Quad r = rotate(q, 0.7, centroid(q));
    const BoxDims d = upright_dims(r);
    EXPECT_NEAR(d.w, 80.0, 1e-9);
    EXPECT_NEAR(d.h, 20.0, 1e-9);
}

TEST(Quad, JsonIsEightNumbers) {
    const Quad q = axis_aligned_quad({1.5, 2}, {3, 4.25});
    const nlohmann::json j = q;
    EXPECT_EQ(j, nlohmann::json::parse("[1.5,2,3,2,3,4.25,1.5,4.25]"));
    EXPECT_EQ(j.get<Quad>(), q);
    EXPECT_THROW(nlohmann::json::parse("[1,2,3]").get<Quad>(), Error);
    EXPECT_THROW(nlohmann::json::parse(R"([1,2,3,4,5,6,7,"x"])").get<Quad>(), Error);
}
