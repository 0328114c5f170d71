#pragma once

#include <array>
#include <numbers>

#include <nlohmann/json_fwd.hpp>

namespace adloc::geometry {

/// Image-space point in pixels; y grows downward.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Corners in order top-left, top-right, bottom-right, bottom-left.
struct Quad {
    std::array<Point, 4> corners{};

    const Point& top_left() const { return corners[0]; }
    const Point& top_right() const { return corners[1]; }
    const Point& bottom_right() const { return corners[2]; }
    const Point& bottom_left() const { return corners[3]; }

    friend bool operator==(const Quad&, const Quad&) = default;
};

struct BoxDims {
    double w = 0.0;
    double h = 0.0;

    friend bool operator==(const BoxDims&, const BoxDims&) = default;
};

/// Axis-aligned quad spanning two diagonal corners.
Quad axis_aligned_quad(Point p1, Point p2);

/// Signed shoelace area; positive for clockwise-on-screen (TL, TR, BR, BL).
double signed_area(const Quad& q);
bool is_degenerate(const Quad& q);

/// Width and height of the box spanned by diagonal endpoints p1 and p2.
/// Throws Error(DegenerateBox) when either extent is zero.
BoxDims box_dims(Point p1, Point p2);

/// Edge lengths of the quad measured along its own top and left edges, so
/// rotated quads report their upright size.
BoxDims upright_dims(const Quad& q);

/// Angle of the top edge (TL -> TR) from horizontal, in (-pi/2, pi/2].
double rotation_angle(const Quad& q);

inline constexpr double kHorizontalSnapRadians = 0.5 * std::numbers::pi / 180.0;

/// rotation_angle with |angle| < 0.5 degree snapped to exactly 0.
double snapped_rotation_angle(const Quad& q);
inline bool is_horizontal(const Quad& q) { return snapped_rotation_angle(q) == 0.0; }

/// Wraps an angle into (-pi/2, pi/2].
double wrap_half_turn(double radians);

Point centroid(const Quad& q);

Quad translate(const Quad& q, Point offset);
/// Rotates each corner by `radians` about `pivot` (positive turns +x toward +y).
Quad rotate(const Quad& q, double radians, Point pivot);

struct Bounds {
    double min_x, min_y, max_x, max_y;
};
Bounds bounds(const Quad& q);

// Quads serialize as [x1,y1,x2,y2,x3,y3,x4,y4].
void to_json(nlohmann::json& j, const Quad& q);
void from_json(const nlohmann::json& j, Quad& q);

}  // namespace adloc::geometry
