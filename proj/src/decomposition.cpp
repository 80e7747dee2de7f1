#include "cdt/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cdt/errors.hpp"

namespace cdt {

std::optional<int> DissectionMap::cutline_between(int a, int b) const {
    for (int id : cells[a].cutline_ids) {
        const auto& c = cutlines[id];
        if (c.other(a) == b) return id;
    }
    return std::nullopt;
}

double DissectionMap::area() const {
    double total = 0.0;
    for (const auto& c : cells) total += signed_area(c.vertices);
    return total;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleTol = 1e-9;

double ccw_angle(Point2 u, Point2 v) {
    double a = std::atan2(cross(u, v), dot(u, v));
    if (a < 0.0) a += kTwoPi;
    return a;
}

struct Local {
    Point2 prev, at, next;
};

Local local(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos) {
    const std::size_t n = sub.ids.size();
    return {poly.vertices[sub.ids[(pos + n - 1) % n]], poly.vertices[sub.ids[pos]],
            poly.vertices[sub.ids[(pos + 1) % n]]};
}

bool reflex_at(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos, double eps) {
    const auto l = local(poly, sub, pos);
    return orient(l.prev, l.at, l.next, eps) < 0;
}

bool in_wedge(const Local& l, Point2 target, double eps) {
    const Point2 a = l.next - l.at;
    const Point2 b = l.prev - l.at;
    const Point2 d = target - l.at;
    const int ad = orient({0, 0}, a, d, eps);
    const int db = orient({0, 0}, d, b, eps);
    if (orient({0, 0}, a, b, eps) > 0) return ad > 0 && db > 0;
    return ad > 0 || db > 0;
}

bool visible(const SimplePolygon& poly, const SubPolygon& sub, std::size_t p, std::size_t q, double eps) {
    const Point2 from = poly.vertices[sub.ids[p]];
    const Point2 to = poly.vertices[sub.ids[q]];
    if (distance(from, to) <= eps) return false;
    if (!in_wedge(local(poly, sub, p), to, eps)) return false;
    if (!in_wedge(local(poly, sub, q), from, eps)) return false;
    const Segment cut{from, to};
    const std::size_t n = sub.ids.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Segment e{poly.vertices[sub.ids[k]], poly.vertices[sub.ids[(k + 1) % n]]};
        const auto hit = seg_intersect(cut, e, eps);
        if (hit.kind == IntersectionKind::none) continue;
        if (hit.kind == IntersectionKind::endpoint_touch &&
            (distance(*hit.point, from) <= eps || distance(*hit.point, to) <= eps))
            continue;
        return false;
    }
    return true;
}

struct CutScore {
    double angle_a = 0.0;
    double angle_b = 0.0;
    double ratio = 0.0;
    double length = 0.0;
    bool in_cone = false;
};

CutScore score(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos, std::size_t cand) {
    const auto l = local(poly, sub, pos);
    const Point2 w = poly.vertices[sub.ids[cand]];
    const double theta = ccw_angle(l.next - l.at, l.prev - l.at);
    CutScore s;
    s.angle_a = ccw_angle(l.next - l.at, w - l.at);
    s.angle_b = theta - s.angle_a;
    const double lo = std::min(s.angle_a, s.angle_b), hi = std::max(s.angle_a, s.angle_b);
    s.ratio = hi > 0.0 ? lo / hi : 0.0;
    s.length = distance(l.at, w);
    s.in_cone = s.angle_a <= std::numbers::pi + kAngleTol && s.angle_b <= std::numbers::pi + kAngleTol;
    return s;
}

// Preference order of weight_cut: larger ratio, then shorter, then lower id.
bool better(const CutScore& a, int id_a, const CutScore& b, int id_b) {
    if (std::abs(a.ratio - b.ratio) > kAngleTol) return a.ratio > b.ratio;
    if (std::abs(a.length - b.length) > kAngleTol * std::max(a.length, b.length)) return a.length < b.length;
    return id_a < id_b;
}

std::vector<int> reflex_after_cut(const SimplePolygon& poly, const SubPolygon& sub, std::size_t p, std::size_t q,
                                  double eps) {
    auto [s1, s2] = split_sub(sub, p, q);
    std::vector<int> out;
    for (int id : {sub.ids[p], sub.ids[q]}) {
        for (const SubPolygon* s : {&s1, &s2}) {
            const auto it = std::find(s->ids.begin(), s->ids.end(), id);
            if (reflex_at(poly, *s, static_cast<std::size_t>(it - s->ids.begin()), eps)) {
                out.push_back(id);
                break;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<int> find_concave(const SimplePolygon& poly, double eps) {
    SubPolygon all;
    all.ids.resize(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) all.ids[i] = static_cast<int>(i);
    std::vector<int> out;
    for (std::size_t i = 0; i < poly.size(); ++i)
        if (reflex_at(poly, all, i, eps)) out.push_back(static_cast<int>(i));
    return out;
}

double interior_angle(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos) {
    const auto l = local(poly, sub, pos);
    const double a = ccw_angle(l.next - l.at, l.prev - l.at);
    return a == 0.0 ? kTwoPi : a;
}

std::vector<std::size_t> viewable_points(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos,
                                         double eps) {
    if (!reflex_at(poly, sub, pos, eps)) throw GeometryError("viewable_points: vertex is not reflex");
    std::vector<std::size_t> all, cone;
    for (std::size_t q = 0; q < sub.ids.size(); ++q) {
        if (q == pos || !visible(poly, sub, pos, q, eps)) continue;
        all.push_back(q);
        if (score(poly, sub, pos, q).in_cone) cone.push_back(q);
    }
    if (all.empty()) throw InternalError("viewable_points: reflex vertex sees no other vertex");
    return cone.empty() ? all : cone;
}

std::pair<SubPolygon, SubPolygon> split_sub(const SubPolygon& sub, std::size_t i, std::size_t j) {
    const std::size_t n = sub.ids.size();
    SubPolygon a, b;
    for (std::size_t k = i;; k = (k + 1) % n) {
        a.ids.push_back(sub.ids[k]);
        if (k == j) break;
    }
    for (std::size_t k = j;; k = (k + 1) % n) {
        b.ids.push_back(sub.ids[k]);
        if (k == i) break;
    }
    return {std::move(a), std::move(b)};
}

WeightedCut weight_cut(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos,
                       const std::vector<std::size_t>& candidates, double eps) {
    if (candidates.empty()) throw GeometryError("weight_cut: no candidates");
    std::size_t best = candidates.front();
    CutScore best_s = score(poly, sub, pos, best);
    for (std::size_t c : candidates) {
        const CutScore s = score(poly, sub, pos, c);
        if (better(s, sub.ids[c], best_s, sub.ids[best])) {
            best = c;
            best_s = s;
        }
    }
    WeightedCut cut;
    cut.from_pos = pos;
    cut.to_pos = best;
    cut.from_id = sub.ids[pos];
    cut.to_id = sub.ids[best];
    cut.angle_a = best_s.angle_a;
    cut.angle_b = best_s.angle_b;
    cut.new_reflex = reflex_after_cut(poly, sub, pos, best, eps);
    return cut;
}

namespace {

// weight_cut over all visible vertices without materializing the visibility
// set: candidates are tried in preference order and visibility is tested
// lazily. Equivalent to weight_cut(viewable_points(...)) because in-cone
// candidates always score a higher ratio than out-of-cone ones.
WeightedCut best_visible_cut(const SimplePolygon& poly, const SubPolygon& sub, std::size_t pos, double eps) {
    struct Cand {
        std::size_t pos;
        CutScore s;
    };
    std::vector<Cand> cands;
    const Point2 at = poly.vertices[sub.ids[pos]];
    const auto l = local(poly, sub, pos);
    for (std::size_t q = 0; q < sub.ids.size(); ++q) {
        if (q == pos) continue;
        const Point2 w = poly.vertices[sub.ids[q]];
        if (distance(w, at) <= eps || !in_wedge(l, w, eps)) continue;
        cands.push_back({q, score(poly, sub, pos, q)});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.s.ratio > b.s.ratio; });
    std::vector<std::size_t> chosen;
    double floor_ratio = -1.0;
    for (const auto& c : cands) {
        if (floor_ratio >= 0.0 && c.s.ratio < floor_ratio - kAngleTol) break;
        if (!visible(poly, sub, pos, c.pos, eps)) continue;
        if (floor_ratio < 0.0) floor_ratio = c.s.ratio;
        chosen.push_back(c.pos);
    }
    if (chosen.empty()) throw InternalError("decompose: reflex vertex sees no other vertex");
    return weight_cut(poly, sub, pos, chosen, eps);
}

bool convex_sub(const SimplePolygon& poly, const SubPolygon& sub, double eps) {
    for (std::size_t i = 0; i < sub.ids.size(); ++i)
        if (reflex_at(poly, sub, i, eps)) return false;
    return true;
}

}  // namespace

DissectionMap decompose(const SimplePolygon& poly, DecomposeStats* stats) {
    const double eps = geometry_eps(poly.vertices);
    if (poly.edge_bridge.size() != poly.size()) throw GeometryError("decompose: malformed polygon");
    if (!is_weakly_simple(poly, eps)) throw GeometryError("decompose: input polygon is not simple");

    const int n = static_cast<int>(poly.size());
    std::vector<SubPolygon> subs(1);
    subs[0].ids.resize(n);
    for (int i = 0; i < n; ++i) subs[0].ids[i] = i;
    std::vector<std::vector<int>> owners(n, std::vector<int>{0});

    // Bridge vertices go last so they are popped first.
    const auto reflex = find_concave(poly, eps);
    std::vector<int> stack;
    for (int v : reflex)
        if (!poly.is_bridge_vertex(v)) stack.push_back(v);
    for (int v : reflex)
        if (poly.is_bridge_vertex(v)) stack.push_back(v);
    std::vector<int> pending(n, 0);
    for (int v : stack) ++pending[v];

    int cuts = 0;
    const int max_cuts = 4 * n + 16;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        --pending[v];

        int s_id = -1;
        std::size_t pos = 0;
        for (int s : owners[v]) {
            const auto& ids = subs[s].ids;
            const std::size_t p = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), v) - ids.begin());
            if (reflex_at(poly, subs[s], p, eps)) {
                s_id = s;
                pos = p;
                break;
            }
        }
        if (s_id < 0) continue;

        const WeightedCut cut = best_visible_cut(poly, subs[s_id], pos, eps);
        auto [a, b] = split_sub(subs[s_id], cut.from_pos, cut.to_pos);
        const int b_id = static_cast<int>(subs.size());
        for (int id : b.ids) {
            auto& own = owners[id];
            if (id == cut.from_id || id == cut.to_id) {
                own.push_back(b_id);
            } else {
                std::replace(own.begin(), own.end(), s_id, b_id);
            }
        }
        subs[s_id] = std::move(a);
        subs.push_back(std::move(b));

        for (int r : cut.new_reflex) {
            if (pending[r] == 0) {
                stack.push_back(r);
                ++pending[r];
            }
        }
        if (++cuts > max_cuts) throw InternalError("decompose: cut budget exceeded");
    }

    for (const auto& s : subs)
        if (!convex_sub(poly, s, eps)) throw InternalError("decompose: non-convex cell left over");

    DissectionMap dm;
    dm.component = poly.component;
    dm.eps = eps;
    for (std::size_t c = 0; c < subs.size(); ++c) {
        ConvexCell cell;
        cell.id = static_cast<int>(c);
        cell.vertex_ids = subs[c].ids;
        Point2 sum{0, 0};
        for (int id : cell.vertex_ids) {
            cell.vertices.push_back(poly.vertices[id]);
            sum = sum + poly.vertices[id];
        }
        cell.centroid = (1.0 / static_cast<double>(cell.vertices.size())) * sum;
        dm.cells.push_back(std::move(cell));
    }

    // Pair up the two sides of every cut and every bridge.
    struct Side {
        int cell;
        int from;
        int to;
    };
    std::map<std::pair<int, int>, std::vector<Side>> cut_sides;
    std::map<int, std::vector<Side>> bridge_sides;
    std::vector<std::pair<int, int>> cut_order;
    for (const auto& cell : dm.cells) {
        const auto& ids = cell.vertex_ids;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const int from = ids[k], to = ids[(k + 1) % ids.size()];
            if (to == (from + 1) % n) {
                if (poly.edge_bridge[from] >= 0) bridge_sides[poly.edge_bridge[from]].push_back({cell.id, from, to});
                continue;
            }
            const auto key = std::minmax(from, to);
            auto& sides = cut_sides[key];
            if (sides.empty()) cut_order.push_back(key);
            sides.push_back({cell.id, from, to});
        }
    }

    std::vector<Cutline> raw;
    auto add = [&](const std::vector<Side>& sides, bool bridge) {
        if (sides.size() != 2 || sides[0].cell == sides[1].cell)
            throw InternalError("decompose: cutline does not border exactly two cells");
        Cutline c;
        c.a = poly.vertices[sides[0].from];
        c.b = poly.vertices[sides[0].to];
        c.left_poly = sides[0].cell;
        c.right_poly = sides[1].cell;
        c.bridge = bridge;
        raw.push_back(c);
    };
    std::sort(cut_order.begin(), cut_order.end());
    for (const auto& key : cut_order) add(cut_sides[key], false);
    for (const auto& [id, sides] : bridge_sides) add(sides, true);

    // Merge collinear chains between the same two cells.
    for (auto& c : raw) {
        if (c.left_poly > c.right_poly) {
            std::swap(c.left_poly, c.right_poly);
            std::swap(c.a, c.b);
        }
    }
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < raw.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < raw.size() && !merged; ++j) {
                auto& ci = raw[i];
                const auto& cj = raw[j];
                if (ci.left_poly != cj.left_poly || ci.right_poly != cj.right_poly) continue;
                if (distance(ci.b, cj.a) <= eps && orient(ci.a, ci.b, cj.b, eps) == 0) {
                    ci.b = cj.b;
                } else if (distance(cj.b, ci.a) <= eps && orient(cj.a, cj.b, ci.b, eps) == 0) {
                    ci.a = cj.a;
                } else {
                    continue;
                }
                ci.bridge = ci.bridge || cj.bridge;
                raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }

    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i].id = static_cast<int>(i);
        dm.cells[raw[i].left_poly].cutline_ids.push_back(raw[i].id);
        dm.cells[raw[i].right_poly].cutline_ids.push_back(raw[i].id);
    }
    dm.cutlines = std::move(raw);
    if (stats) {
        stats->cuts = cuts;
        stats->initial_reflex = static_cast<int>(reflex.size());
    }
    return dm;
}

}  // namespace cdt
