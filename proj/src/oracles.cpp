#include "cdt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>

#include "cdt/errors.hpp"

namespace cdt {

std::pair<int, int> Raster::pixel_of(Point2 p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / pixel)),
            static_cast<int>(std::floor((p.y - origin.y) / pixel))};
}

Raster raster_from_grid(const OccupancyGrid& grid) {
    Raster r;
    r.width = grid.width;
    r.height = grid.height;
    r.pixel = grid.resolution;
    r.label.assign(static_cast<std::size_t>(r.width) * r.height, -1);
    for (int row = 0; row < r.height; ++row)
        for (int col = 0; col < r.width; ++col)
            if (grid.free(col, grid.height - 1 - row)) r.label[static_cast<std::size_t>(row) * r.width + col] = 0;
    return r;
}

Raster raster_from_dissection(const DissectionMap& dm, int cols, int rows) {
    if (cols <= 0 || rows <= 0) throw InvalidInput("raster_from_dissection: bad size");
    if (dm.cells.empty()) throw InvalidInput("raster_from_dissection: empty map");
    Point2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Point2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const auto& c : dm.cells)
        for (Point2 v : c.vertices) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
        }
    Raster r;
    r.width = cols;
    r.height = rows;
    r.pixel = std::max((hi.x - lo.x) / cols, (hi.y - lo.y) / rows);
    r.origin = lo;
    r.label.assign(static_cast<std::size_t>(cols) * rows, -1);

    // Bucket cells by bounding box so each pixel tests only a few polygons.
    for (const auto& cell : dm.cells) {
        Point2 clo = cell.vertices[0], chi = cell.vertices[0];
        for (Point2 v : cell.vertices) {
            clo = {std::min(clo.x, v.x), std::min(clo.y, v.y)};
            chi = {std::max(chi.x, v.x), std::max(chi.y, v.y)};
        }
        const auto [c0, r0] = r.pixel_of(clo);
        const auto [c1, r1] = r.pixel_of(chi);
        for (int row = std::max(r0, 0); row <= std::min(r1, rows - 1); ++row)
            for (int col = std::max(c0, 0); col <= std::min(c1, cols - 1); ++col) {
                int& slot = r.label[static_cast<std::size_t>(row) * cols + col];
                if (slot >= 0 && slot < cell.id) continue;  // lowest id wins
                if (point_in_convex(cell.vertices, r.center(col, row), dm.eps) != Containment::exterior)
                    slot = cell.id;
            }
    }
    return r;
}

namespace {

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

// Layered 8-connected Dijkstra. `layer_ok(layer, label)` says whether a pixel
// with that label may be occupied in `layer`; `layers` = 1 for the plain search.
template <class LayerOk>
OraclePath layered_dijkstra(const Raster& R, int layers, LayerOk layer_ok, std::pair<int, int> s,
                            std::pair<int, int> g, Point2 start, Point2 goal) {
    const std::size_t plane = static_cast<std::size_t>(R.width) * R.height;
    std::vector<double> dist(plane * layers, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> prev(plane * layers, -1);
    using Item = std::pair<double, std::int64_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto key = [&](int layer, int c, int r) {
        return static_cast<std::int64_t>(layer) * static_cast<std::int64_t>(plane) +
               static_cast<std::int64_t>(r) * R.width + c;
    };
    const std::int64_t src = key(0, s.first, s.second);
    const std::int64_t dst = key(layers - 1, g.first, g.second);
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
        const auto [d, k] = pq.top();
        pq.pop();
        if (d > dist[k]) continue;
        if (k == dst) break;
        const int layer = static_cast<int>(k / static_cast<std::int64_t>(plane));
        const std::int64_t rem = k % static_cast<std::int64_t>(plane);
        const int c = static_cast<int>(rem % R.width), r = static_cast<int>(rem / R.width);
        for (int dir = 0; dir < 8; ++dir) {
            const int nc = c + kDx[dir], nr = r + kDy[dir];
            const int lab = R.at(nc, nr);
            if (lab < 0) continue;
            if (dir >= 4 && (R.at(c + kDx[dir], r) < 0 || R.at(c, r + kDy[dir]) < 0)) continue;
            const double step = dir >= 4 ? std::sqrt(2.0) : 1.0;
            for (int nl = layer; nl <= std::min(layer + 1, layers - 1); ++nl) {
                if (!layer_ok(nl, lab)) continue;
                const std::int64_t nk = key(nl, nc, nr);
                const double nd = d + step * R.pixel;
                if (nd < dist[nk]) {
                    dist[nk] = nd;
                    prev[nk] = k;
                    pq.push({nd, nk});
                }
            }
        }
    }
    if (!std::isfinite(dist[dst])) throw Unreachable("oracle: goal not reachable on the raster");

    OraclePath out;
    std::vector<Point2> rev{goal};
    for (std::int64_t k = dst; k >= 0; k = prev[k]) {
        const std::int64_t rem = k % static_cast<std::int64_t>(plane);
        rev.push_back(R.center(static_cast<int>(rem % R.width), static_cast<int>(rem / R.width)));
    }
    rev.push_back(start);
    for (auto it = rev.rbegin(); it != rev.rend(); ++it)
        if (out.path.empty() || distance(out.path.back(), *it) > 0.0) out.path.push_back(*it);
    out.length = polyline_length(out.path);
    return out;
}

}  // namespace

OraclePath oracle_dijkstra(const Raster& raster, Point2 start, Point2 goal) {
    const auto s = raster.pixel_of(start);
    const auto g = raster.pixel_of(goal);
    if (raster.at(s.first, s.second) < 0) throw NotInFreeSpace("oracle_dijkstra: start pixel is blocked");
    if (raster.at(g.first, g.second) < 0) throw NotInFreeSpace("oracle_dijkstra: goal pixel is blocked");
    return layered_dijkstra(raster, 1, [](int, int) { return true; }, s, g, start, goal);
}

OraclePath oracle_class_dijkstra(const Raster& raster, std::span<const int> cells, Point2 start, Point2 goal) {
    if (cells.empty()) throw InvalidInput("oracle_class_dijkstra: empty cell chain");
    auto nearest = [&](int cell, Point2 p) {
        std::pair<int, int> best{-1, -1};
        double bd = std::numeric_limits<double>::infinity();
        for (int r = 0; r < raster.height; ++r)
            for (int c = 0; c < raster.width; ++c)
                if (raster.at(c, r) == cell) {
                    const double d = distance(raster.center(c, r), p);
                    if (d < bd) {
                        bd = d;
                        best = {c, r};
                    }
                }
        if (best.first < 0) throw Unreachable("oracle_class_dijkstra: cell has no pixel at this resolution");
        return best;
    };
    const auto s = nearest(cells.front(), start);
    const auto g = nearest(cells.back(), goal);
    const int layers = static_cast<int>(cells.size());
    return layered_dijkstra(raster, layers, [&](int layer, int lab) { return cells[layer] == lab; }, s, g, start,
                            goal);
}

Point2 interior_point(std::span<const Point2> polygon) {
    if (polygon.size() < 3) throw InvalidInput("interior_point: fewer than three vertices");
    std::vector<double> ys;
    for (Point2 v : polygon) ys.push_back(v.y);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (ys.size() < 2) throw GeometryError("interior_point: degenerate polygon");
    const std::size_t k = (ys.size() - 1) / 2;
    const double y = 0.5 * (ys[k] + ys[k + 1]);
    std::vector<double> xs;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = polygon[i], b = polygon[(i + 1) % n];
        if ((a.y < y) != (b.y < y)) xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    if (xs.size() < 2) throw GeometryError("interior_point: scanline missed the polygon");
    return {0.5 * (xs[0] + xs[1]), y};
}

std::vector<Point2> obstacle_representatives(const ComponentGeometry& component) {
    std::vector<Point2> reps;
    for (const auto& h : component.holes) reps.push_back(interior_point(h));
    return reps;
}

namespace {

// Rotation taking `d` to straight up.
struct Frame {
    double c = 1.0, s = 0.0;
    explicit Frame(Point2 d) {
        const double len = std::hypot(d.x, d.y);
        c = d.y / len;
        s = d.x / len;
    }
    Point2 operator()(Point2 p) const { return {c * p.x - s * p.y, s * p.x + c * p.y}; }
};

// Intervals of the vertical line x inside a closed polygon, as sorted
// boundary crossings (pairs enter/leave).
std::vector<double> vertical_crossings(const std::vector<Point2>& poly, double x) {
    std::vector<double> ys;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i], b = poly[(i + 1) % n];
        if ((a.x < x) != (b.x < x)) ys.push_back(a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y));
    }
    std::sort(ys.begin(), ys.end());
    return ys;
}

bool ray_hits(const std::vector<Point2>& poly, double x, double y0) {
    const auto ys = vertical_crossings(poly, x);
    return !ys.empty() && ys.back() > y0;
}

std::optional<std::vector<Point2>> anchors_for(const std::vector<std::vector<Point2>>& holes, Frame fr) {
    std::vector<std::vector<Point2>> rot;
    for (const auto& h : holes) {
        auto& r = rot.emplace_back();
        for (Point2 p : h) r.push_back(fr(p));
    }
    std::vector<Point2> out;
    for (std::size_t i = 0; i < rot.size(); ++i) {
        std::vector<double> xs;
        for (Point2 p : rot[i]) xs.push_back(p.x);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::optional<Point2> pick;
        for (std::size_t k = 0; k + 1 < xs.size() && !pick; ++k) {
            const double x = 0.5 * (xs[k] + xs[k + 1]);
            const auto ys = vertical_crossings(rot[i], x);
            if (ys.size() < 2) continue;
            // topmost inside interval, so the ray never re-enters its hole
            const Point2 a{x, 0.5 * (ys[ys.size() - 2] + ys.back())};
            bool clear = true;
            for (std::size_t j = 0; j < rot.size() && clear; ++j)
                if (j != i && ray_hits(rot[j], x, a.y)) clear = false;
            if (clear) pick = a;
        }
        if (!pick) return std::nullopt;
        // back to the map frame
        out.push_back({fr.c * pick->x + fr.s * pick->y, -fr.s * pick->x + fr.c * pick->y});
    }
    return out;
}

}  // namespace

SignatureRays signature_rays(const ComponentGeometry& component) {
    constexpr int kDirections = 72;
    for (int k = 0; k < kDirections; ++k) {
        // up first, then fanning out on alternate sides
        const double step = 2.0 * std::numbers::pi / kDirections;
        const double angle = 0.5 * std::numbers::pi + (k % 2 ? 1 : -1) * ((k + 1) / 2) * step;
        const Point2 d{std::cos(angle), std::sin(angle)};
        const Point2 dir = k == 0 ? Point2{0.0, 1.0} : d;
        if (auto a = anchors_for(component.holes, Frame(dir))) return {dir, std::move(*a)};
    }
    throw GeometryError("signature_rays: every tried direction has a ray blocked by another hole");
}

std::vector<int> hsignature(std::span<const Point2> f, std::span<const Point2> representatives) {
    return hsignature(f, SignatureRays{{0.0, 1.0}, {representatives.begin(), representatives.end()}});
}

std::vector<int> hsignature(std::span<const Point2> f_in, const SignatureRays& rays) {
    const Frame fr(rays.direction);
    std::vector<Point2> f;
    for (Point2 p : f_in) f.push_back(fr(p));
    std::vector<Point2> reps;
    for (Point2 p : rays.anchors) reps.push_back(fr(p));
    // Nudge any ray that passes exactly through a vertex above its anchor.
    for (Point2& rep : reps) {
        double nudge = geometry_eps(f);
        for (bool hit = true; hit;) {
            hit = false;
            for (Point2 v : f)
                if (v.x == rep.x && v.y > rep.y) {
                    rep.x += nudge;
                    nudge *= 2.0;
                    hit = true;
                    break;
                }
        }
    }
    struct Crossing {
        double t;
        int symbol;
    };
    std::vector<int> word;
    for (std::size_t i = 1; i < f.size(); ++i) {
        const Point2 a = f[i - 1], b = f[i];
        std::vector<Crossing> hits;
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const Point2 r = reps[k];
            if ((a.x < r.x) == (b.x < r.x)) continue;
            const double t = (r.x - a.x) / (b.x - a.x);
            if (a.y + t * (b.y - a.y) <= r.y) continue;
            hits.push_back({t, a.x < r.x ? static_cast<int>(k) + 1 : -static_cast<int>(k) - 1});
        }
        std::sort(hits.begin(), hits.end(), [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
        for (const Crossing& h : hits) {
            if (!word.empty() && word.back() == -h.symbol)
                word.pop_back();
            else
                word.push_back(h.symbol);
        }
    }
    return word;
}

}  // namespace cdt
