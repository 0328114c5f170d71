#include "adloc/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"

namespace adloc::geometry {

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

Quad axis_aligned_quad(Point p1, Point p2) {
    const double x0 = std::min(p1.x, p2.x), x1 = std::max(p1.x, p2.x);
    const double y0 = std::min(p1.y, p2.y), y1 = std::max(p1.y, p2.y);
    return Quad{{Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}}};
}

double signed_area(const Quad& q) {
    double twice = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point& a = q.corners[i];
        const Point& b = q.corners[(i + 1) % 4];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

bool is_degenerate(const Quad& q) {
    for (const auto& p : q.corners) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return true;
    }
    return std::abs(signed_area(q)) <= 0.0;
}

BoxDims box_dims(Point p1, Point p2) {
    const BoxDims d{std::abs(p2.x - p1.x), std::abs(p2.y - p1.y)};
    if (!(d.w > 0.0) || !(d.h > 0.0)) {
        throw Error(ErrorCode::DegenerateBox, "box has zero width or height");
    }
    return d;
}

BoxDims upright_dims(const Quad& q) {
    const BoxDims d{distance(q.top_left(), q.top_right()), distance(q.top_left(), q.bottom_left())};
    if (!(d.w > 0.0) || !(d.h > 0.0)) {
        throw Error(ErrorCode::DegenerateBox, "quad has a zero-length edge");
    }
    return d;
}

double wrap_half_turn(double radians) {
    constexpr double pi = std::numbers::pi;
    double a = std::remainder(radians, pi);  // [-pi/2, pi/2]
    if (a <= -pi / 2) a += pi;
    return a;
}

double rotation_angle(const Quad& q) {
    const Point d = q.top_right() - q.top_left();
    if (d.y == 0.0) return 0.0;
    return wrap_half_turn(std::atan2(d.y, d.x));
}

double snapped_rotation_angle(const Quad& q) {
    const double a = rotation_angle(q);
    return std::abs(a) < kHorizontalSnapRadians ? 0.0 : a;
}

Point centroid(const Quad& q) {
    Point sum;
    for (const auto& p : q.corners) sum = sum + p;
    return sum * 0.25;
}

Quad translate(const Quad& q, Point offset) {
    Quad out = q;
    for (auto& p : out.corners) p = p + offset;
    return out;
}

Quad rotate(const Quad& q, double radians, Point pivot) {
    const double c = std::cos(radians), s = std::sin(radians);
    Quad out = q;
    for (auto& p : out.corners) {
        const Point r = p - pivot;
        p = Point{pivot.x + r.x * c - r.y * s, pivot.y + r.x * s + r.y * c};
    }
    return out;
}

Bounds bounds(const Quad& q) {
    Bounds b{q.corners[0].x, q.corners[0].y, q.corners[0].x, q.corners[0].y};
    for (const auto& p : q.corners) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

void to_json(nlohmann::json& j, const Quad& q) {
    j = nlohmann::json::array();
    for (const auto& p : q.corners) {
        j.push_back(p.x);
        j.push_back(p.y);
    }
}

void from_json(const nlohmann::json& j, Quad& q) {
    if (!j.is_array() || j.size() != 8) {
        throw Error(ErrorCode::InvalidArgument, "quad must be an array of 8 numbers");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[2 * i].is_number() || !j[2 * i + 1].is_number()) {
            throw Error(ErrorCode::InvalidArgument, "quad coordinates must be numeric");
        }
        q.corners[i] = Point{j[2 * i].get<double>(), j[2 * i + 1].get<double>()};
    }
}

}  // namespace adloc::geometry
