#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace cdt {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Segment {
    Point2 a;
    Point2 b;
};

using Polyline = std::vector<Point2>;

inline double cross(Point2 u, Point2 v) { return u.x * v.y - u.y * v.x; }
inline double dot(Point2 u, Point2 v) { return u.x * v.x + u.y * v.y; }
inline double norm(Point2 u) { return std::sqrt(u.x * u.x + u.y * u.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + t * (b - a); }
inline Point2 midpoint(Point2 a, Point2 b) { return lerp(a, b, 0.5); }

/// Default absolute tolerance used when no scale is known.
inline constexpr double kDefaultEps = 1e-9;

/// Scale-free degeneracy tolerance: 1e-9 of the bounding-box diagonal.
double geometry_eps(std::span<const Point2> points);

/// Sign of (b-a)x(c-a). Zero when c lies within `eps` (a distance) of the
/// line through a and b, or when either leg is degenerate.
int orient(Point2 a, Point2 b, Point2 c, double eps = kDefaultEps);

enum class IntersectionKind { none, proper, endpoint_touch, collinear_overlap };

struct Intersection {
    IntersectionKind kind = IntersectionKind::none;
    std::optional<Point2> point;
};

/// Classifies the intersection of two closed segments. Collinear overlaps
/// report the midpoint of the shared part.
Intersection seg_intersect(const Segment& s, const Segment& t, double eps = kDefaultEps);

double polyline_length(std::span<const Point2> f);

enum class Containment { interior, boundary, exterior };

/// `poly` must be convex and counter-clockwise; throws GeometryError otherwise.
Containment point_in_convex(std::span<const Point2> poly, Point2 p, double eps = kDefaultEps);

double signed_area(std::span<const Point2> poly);

/// Even-odd test against a closed loop; points on the boundary are reported
/// as inside.
bool point_in_polygon(std::span<const Point2> poly, Point2 p, double eps = kDefaultEps);

double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// True when the loop has no two non-adjacent edges that intersect.
bool is_simple(std::span<const Point2> poly, double eps = kDefaultEps);

}  // namespace cdt
