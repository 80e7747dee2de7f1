#pragma once

#include <optional>
#include <vector>

#include "cdt/geometry.hpp"
#include "cdt/map_ingest.hpp"

namespace cdt {

/// Shared border of two convex cells. Endpoints are vertices of the input
/// polygon; `bridge` marks the two sides of a keyhole bridge.
struct Cutline {
    int id = 0;
    Point2 a;
    Point2 b;
    int left_poly = -1;   // cell on the left of a->b
    int right_poly = -1;  // cell on the right of a->b
    bool bridge = false;

    int other(int cell) const { return cell == left_poly ? right_poly : left_poly; }
    Point2 at(double t) const { return lerp(a, b, t); }
    Point2 mid() const { return midpoint(a, b); }
};

struct ConvexCell {
    int id = 0;
    std::vector<Point2> vertices;  // counter-clockwise
    std::vector<int> vertex_ids;   // indices into the input polygon
    std::vector<int> cutline_ids;
    Point2 centroid;
};

struct DissectionMap {
    std::vector<ConvexCell> cells;
    std::vector<Cutline> cutlines;
    int component = 0;
    double eps = kDefaultEps;

    /// First cutline joining two cells, if any.
    std::optional<int> cutline_between(int a, int b) const;
    double area() const;
};

/// Sub-polygon view used while cutting: a cycle of indices into `poly`.
struct SubPolygon {
    std::vector<int> ids;
};

/// Indices of reflex vertices in polygon order.
std::vector<int> find_concave(const SimplePolygon& poly, double eps);

/// Interior angle (radians, in (0, 2pi]) at position `pos` of a sub-polygon.
double interior_angle(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos);

/// Visible vertices from the reflex vertex at position `pos`, as positions in
/// `sub`. Candidates inside the reflex cone (both sub-angles at most 180
/// degrees) are returned when any exist; otherwise every visible vertex.
/// Throws GeometryError if the vertex is not reflex, InternalError if nothing
/// is visible.
std::vector<std::size_t> viewable_points(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos,
                                         double eps);

struct WeightedCut {
    std::size_t from_pos = 0;
    std::size_t to_pos = 0;
    int from_id = 0;
    int to_id = 0;
    double angle_a = 0.0;  // between the edge to the next vertex and the cut
    double angle_b = 0.0;  // between the cut and the edge from the previous vertex
    std::vector<int> new_reflex;
};

/// Picks the candidate whose cut splits the angle at `pos` most evenly
/// (largest min/max ratio); ties go to the shorter cut, then the lower vertex
/// index. `new_reflex` lists the endpoints still reflex after the cut.
WeightedCut weight_cut(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos,
                       const std::vector<std::size_t>& candidates, double eps);

/// Splits `sub` along a cut between positions i and j.
std::pair<SubPolygon, SubPolygon> split_sub(const SubPolygon& sub, std::size_t i, std::size_t j);

struct DecomposeStats {
    int cuts = 0;
    int initial_reflex = 0;
};

/// Convex dissection of a (keyholed) simple polygon.
DissectionMap decompose(const SimplePolygon& poly, DecomposeStats* stats = nullptr);

}  // namespace cdt
