#include "cdt/geometry.hpp"

#include <algorithm>
#include <limits>

#include "cdt/errors.hpp"

namespace cdt {

double geometry_eps(std::span<const Point2> points) {
    if (points.empty()) return kDefaultEps;
    double lo_x = points[0].x, hi_x = points[0].x;
    double lo_y = points[0].y, hi_y = points[0].y;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const double diag = std::hypot(hi_x - lo_x, hi_y - lo_y);
    return diag > 0.0 ? 1e-9 * diag : kDefaultEps;
}

int orient(Point2 a, Point2 b, Point2 c, double eps) {
    const Point2 u = b - a;
    const Point2 v = c - a;
    const double c2 = cross(u, v);
    const double scale = std::max(norm(u), norm(v));
    if (std::abs(c2) <= eps * scale) return 0;
    return c2 > 0.0 ? 1 : -1;
}

namespace {

// Parameter of the projection of p on the line through a,b.
double project_param(Point2 p, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return 0.0;
    return dot(p - a, d) / len2;
}

bool on_segment(Point2 p, Point2 a, Point2 b, double eps) {
    return point_segment_distance(p, a, b) <= eps;
}

Intersection collinear_case(const Segment& s, const Segment& t, double eps) {
    // Work along the direction of the longer segment.
    const Segment& base = distance(s.a, s.b) >= distance(t.a, t.b) ? s : t;
    const Point2 dir = base.b - base.a;
    const double len = norm(dir);
    if (len == 0.0) {
        if (distance(s.a, t.a) <= eps) return {IntersectionKind::endpoint_touch, s.a};
        return {};
    }
    auto param = [&](Point2 p) { return dot(p - base.a, dir) / len; };
    double s0 = param(s.a), s1 = param(s.b);
    double t0 = param(t.a), t1 = param(t.b);
    if (s0 > s1) std::swap(s0, s1);
    if (t0 > t1) std::swap(t0, t1);
    const double lo = std::max(s0, t0);
    const double hi = std::min(s1, t1);
    if (hi < lo - eps) return {};
    const Point2 unit{dir.x / len, dir.y / len};
    if (hi - lo <= eps) {
        const double m = 0.5 * (lo + hi);
        return {IntersectionKind::endpoint_touch, base.a + m * unit};
    }
    return {IntersectionKind::collinear_overlap, base.a + (0.5 * (lo + hi)) * unit};
}

}  // namespace

Intersection seg_intersect(const Segment& s, const Segment& t, double eps) {
    const int d1 = orient(t.a, t.b, s.a, eps);
    const int d2 = orient(t.a, t.b, s.b, eps);
    const int d3 = orient(s.a, s.b, t.a, eps);
    const int d4 = orient(s.a, s.b, t.b, eps);

    if ((d1 == 0 && d2 == 0) || (d3 == 0 && d4 == 0)) return collinear_case(s, t, eps);

    if (d1 * d2 < 0 && d3 * d4 < 0) {
        const Point2 r = s.b - s.a;
        const Point2 q = t.b - t.a;
        const double denom = cross(r, q);
        const double u = cross(t.a - s.a, q) / denom;
        return {IntersectionKind::proper, s.a + u * r};
    }

    // Touching configurations: an endpoint of one lies on the other.
    if (d1 == 0 && on_segment(s.a, t.a, t.b, eps)) return {IntersectionKind::endpoint_touch, s.a};
    if (d2 == 0 && on_segment(s.b, t.a, t.b, eps)) return {IntersectionKind::endpoint_touch, s.b};
    if (d3 == 0 && on_segment(t.a, s.a, s.b, eps)) return {IntersectionKind::endpoint_touch, t.a};
    if (d4 == 0 && on_segment(t.b, s.a, s.b, eps)) return {IntersectionKind::endpoint_touch, t.b};
    return {};
}

double polyline_length(std::span<const Point2> f) {
    double total = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) total += distance(f[i - 1], f[i]);
    return total;
}

double signed_area(std::span<const Point2> poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

Containment point_in_convex(std::span<const Point2> poly, Point2 p, double eps) {
    const std::size_t n = poly.size();
    if (n < 3) throw GeometryError("point_in_convex: fewer than 3 vertices");
    if (signed_area(poly) <= 0.0) throw GeometryError("point_in_convex: polygon is not counter-clockwise");
    for (std::size_t i = 0; i < n; ++i) {
        if (orient(poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n], eps) < 0)
            throw GeometryError("point_in_convex: polygon is not convex");
    }
    bool on_edge = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        const double side = cross(b - a, p - a) / len;
        if (side < -eps) return Containment::exterior;
        if (side <= eps) on_edge = true;
    }
    return on_edge ? Containment::boundary : Containment::interior;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double t = std::clamp(project_param(p, a, b), 0.0, 1.0);
    return distance(p, lerp(a, b, t));
}

bool point_in_polygon(std::span<const Point2> poly, Point2 p, double eps) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = poly[j];
        const Point2 b = poly[i];
        if (point_segment_distance(p, a, b) <= eps) return true;
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

bool is_simple(std::span<const Point2> poly, double eps) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Segment ei{poly[i], poly[(i + 1) % n]};
        if (distance(ei.a, ei.b) <= eps) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Segment ej{poly[j], poly[(j + 1) % n]};
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const auto hit = seg_intersect(ei, ej, eps);
            if (adjacent) {
                if (hit.kind == IntersectionKind::collinear_overlap) return false;
                continue;
            }
            if (hit.kind != IntersectionKind::none) return false;
        }
    }
    return true;
}

}  // namespace cdt
