#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "cdt/decomposition.hpp"
#include "cdt/geometry.hpp"
#include "cdt/map_ingest.hpp"
#include "cdt/planner.hpp"
#include "cdt/topology.hpp"

namespace cdt::test {

inline BoundaryLoop closed_loop(std::vector<Point2> pts, LoopKind kind) {
    pts.push_back(pts.front());
    return {std::move(pts), kind};
}

/// Simple polygon without holes from an open vertex list.
inline SimplePolygon plain_polygon(const std::vector<Point2>& pts) {
    return merge_holes(closed_loop(pts, LoopKind::outer), {});
}

inline SimplePolygon polygon_with_holes(const std::vector<Point2>& outer,
                                        const std::vector<std::vector<Point2>>& holes) {
    std::vector<BoundaryLoop> hl;
    for (const auto& h : holes) hl.push_back(closed_loop(h, LoopKind::hole));
    return merge_holes(closed_loop(outer, LoopKind::outer), hl);
}

inline std::vector<Point2> l_hexagon() { return {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}; }

inline std::vector<Point2> square(double x0, double y0, double side) {
    return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
}

/// '#' = occupied, anything else free. First string is the top row.
inline OccupancyGrid grid_from_ascii(const std::vector<std::string>& rows, double resolution = 1.0) {
    OccupancyGrid g = make_grid(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), resolution);
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c)
            g.cells[static_cast<std::size_t>(r) * g.width + c] = rows[r][c] == '#' ? 255 : 0;
    return g;
}

/// Fills the rectangle [c0,c1) x [r0,r1) with obstacle cells.
inline void block(OccupancyGrid& g, int c0, int r0, int c1, int r1) {
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) g.cells[static_cast<std::size_t>(r) * g.width + c] = 255;
}

/// Star-shaped polygon around `centre`: jittered, evenly spread angles
/// (gaps stay below 180 degrees) with radii in [rmin, rmax]. Always simple.
inline std::vector<Point2> random_star(std::mt19937_64& rng, int n, Point2 centre, double rmin, double rmax) {
    std::uniform_real_distribution<double> jitter(0.0, 0.8);
    std::uniform_real_distribution<double> rad(rmin, rmax);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double p0 = phase(rng);
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        const double a = p0 + 2.0 * std::numbers::pi * (i + jitter(rng)) / n;
        const double r = rad(rng);
        pts.push_back({centre.x + r * std::cos(a), centre.y + r * std::sin(a)});
    }
    return pts;
}

inline double loop_distance(Point2 p, const std::vector<Point2>& loop) {
    double best = 1e300;
    for (std::size_t i = 0; i < loop.size(); ++i)
        best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]));
    return best;
}

/// Random star polygon with up to three star-shaped holes. Holes that would
/// touch the boundary or each other are dropped. Outer vertex count in
/// [5, max_vertices].
struct RandomPolygon {
    std::vector<Point2> outer;
    std::vector<std::vector<Point2>> holes;
    SimplePolygon poly;
};

inline RandomPolygon random_polygon(std::mt19937_64& rng, int max_vertices = 200) {
    RandomPolygon out;
    std::uniform_int_distribution<int> nv(5, max_vertices);
    std::uniform_int_distribution<int> nh(0, 3);
    std::uniform_int_distribution<int> hv(3, 8);
    std::uniform_real_distribution<double> pos(-45.0, 45.0);
    out.outer = random_star(rng, nv(rng), {0, 0}, 50.0, 100.0);
    const int holes = nh(rng);
    std::vector<std::pair<Point2, double>> placed;
    for (int i = 0; i < holes; ++i) {
        const Point2 c{pos(rng), pos(rng)};
        const double r = 9.0;
        if (!point_in_polygon(out.outer, c) || loop_distance(c, out.outer) < r + 1.0) continue;
        bool clear = true;
        for (const auto& [q, rq] : placed) clear = clear && distance(c, q) > r + rq + 1.0;
        if (!clear) continue;
        out.holes.push_back(random_star(rng, hv(rng), c, 3.0, r));
        placed.push_back({c, r});
    }
    out.poly = polygon_with_holes(out.outer, out.holes);
    return out;
}

/// Map pipeline on a grid: ingest, dissect, build graphs.
inline CdtMap cdt_map(const OccupancyGrid& g, double epsilon_fit = 1.0) {
    return build_map(ingest(g, {.epsilon_fit = epsilon_fit}));
}

/// Uniform point in a convex cell, pulled slightly towards the centroid so
/// it is strictly interior.
inline Point2 random_point_in_cell(const ConvexCell& cell, std::mt19937_64& rng) {
    const auto& v = cell.vertices;
    std::vector<double> acc;
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        total += 0.5 * std::abs(cross(v[i] - v[0], v[i + 1] - v[0]));
        acc.push_back(total);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double pick = u(rng) * total;
    const std::size_t t = std::min<std::size_t>(std::lower_bound(acc.begin(), acc.end(), pick) - acc.begin(),
                                                acc.size() - 1);
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
    const Point2 p = v[0] + a * (v[t + 1] - v[0]) + b * (v[t + 2] - v[0]);
    return lerp(cell.centroid, p, 0.98);
}

/// Area-weighted random cell.
inline int random_cell(const DissectionMap& dm, std::mt19937_64& rng) {
    std::vector<double> w;
    for (const auto& c : dm.cells) w.push_back(signed_area(c.vertices));
    std::discrete_distribution<int> d(w.begin(), w.end());
    return d(rng);
}

/// Random walk of `steps` moves over the graph (backtracking allowed),
/// realised as a polyline that crosses each cutline at a random interior
/// point. Returns the polyline and the walk.
struct WalkPath {
    Polyline polyline;
    std::vector<int> cells;
    std::vector<int> cutlines;
};

inline WalkPath random_walk_path(const DissectionMap& dm, const TopologyGraph& g, int start, int steps,
                                 std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    WalkPath w;
    w.cells.push_back(start);
    w.polyline.push_back(random_point_in_cell(dm.cells[start], rng));
    int at = start;
    for (int s = 0; s < steps; ++s) {
        const auto links = g.links(at);
        if (links.empty()) break;
        const auto& l = links[rng() % links.size()];
        w.polyline.push_back(dm.cutlines[l.edge].at(u(rng)));
        at = l.neighbor;
        w.cells.push_back(at);
        w.cutlines.push_back(l.edge);
        w.polyline.push_back(random_point_in_cell(dm.cells[at], rng));
    }
    return w;
}

/// Random no-rollback node sequence of up to `len` nodes.
inline std::vector<int> random_code_nodes(const TopologyGraph& g, int start, int len, std::mt19937_64& rng) {
    std::vector<int> nodes{start};
    while (static_cast<int>(nodes.size()) < len) {
        auto nb = g.neighbors(nodes.back());
        if (nodes.size() >= 2) std::erase(nb, nodes[nodes.size() - 2]);
        if (nb.empty()) break;
        nodes.push_back(nb[rng() % nb.size()]);
    }
    return nodes;
}

/// Cells built straight from a polygon.
inline ComponentMap component_from_polygon(const SimplePolygon& poly) {
    ComponentMap m;
    m.dm = decompose(poly);
    m.graph = build_graph(m.dm);
    return m;
}

/// Square of side 30 with a 10x10 hole in the middle: the smallest map with
/// two homotopy classes between opposite corners.
inline ComponentMap ring_map() {
    return component_from_polygon(polygon_with_holes(square(0, 0, 30), {{{10, 10}, {10, 20}, {20, 20}, {20, 10}}}));
}

// Shortest cell route by BFS: cells and the cutline entering each.
inline std::pair<std::vector<int>, std::vector<int>> bfs_route(const TopologyGraph& g, int from, int to) {
    std::vector<int> prev(g.node_count(), -1), via(g.node_count(), -1);
    std::queue<int> q;
    q.push(from);
    prev[from] = from;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (const auto& l : g.links(v))
            if (prev[l.neighbor] < 0) {
                prev[l.neighbor] = v;
                via[l.neighbor] = l.edge;
                q.push(l.neighbor);
            }
    }
    std::vector<int> cells, edges;
    for (int v = to; v != from; v = prev[v]) {
        cells.push_back(v);
        edges.push_back(via[v]);
    }
    cells.push_back(from);
    edges.push_back(-1);
    std::reverse(cells.begin(), cells.end());
    std::reverse(edges.begin(), edges.end());
    return {cells, edges};
}

// Polyline from ps to pe through the given cells, crossing each cutline at a
// random interior point.
inline Polyline realise(const DissectionMap& dm, const std::vector<int>& cells, const std::vector<int>& edges, Point2 ps,
                 Point2 pe, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Polyline f{ps};
    for (std::size_t i = 1; i < cells.size(); ++i) {
        f.push_back(dm.cutlines[edges[i]].at(u(rng)));
        if (i + 1 < cells.size()) f.push_back(random_point_in_cell(dm.cells[cells[i]], rng));
    }
    f.push_back(pe);
    return f;
}

// Random detour from `from` followed by the BFS route to `to`.
inline Polyline random_route(const DissectionMap& dm, const TopologyGraph& g, int from, int to, Point2 ps, Point2 pe,
                      std::mt19937_64& rng) {
    auto w = random_walk_path(dm, g, from, int(rng() % 8), rng);
    auto [cells, edges] = bfs_route(g, w.cells.back(), to);
    std::vector<int> all_cells = w.cells, all_edges{-1};
    all_edges.insert(all_edges.end(), w.cutlines.begin(), w.cutlines.end());
    all_cells.insert(all_cells.end(), cells.begin() + 1, cells.end());
    all_edges.insert(all_edges.end(), edges.begin() + 1, edges.end());
    return realise(dm, all_cells, all_edges, ps, pe, rng);
}

}  // namespace cdt::test
