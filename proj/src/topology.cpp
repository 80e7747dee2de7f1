#include "cdt/topology.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

// ---------------------------------------------------------------------------
// Graph

TopologyGraph::TopologyGraph(int nodes, std::vector<Edge> edges)
    : edges_(std::move(edges)), adj_(static_cast<std::size_t>(nodes)), active_(static_cast<std::size_t>(nodes), 1) {
    for (const auto& e : edges_) {
        if (e.u == e.v) throw InternalError("TopologyGraph: self loop");
        adj_[e.u].push_back({e.v, e.id});
        adj_[e.v].push_back({e.u, e.id});
    }
}

std::vector<TopologyGraph::Link> TopologyGraph::links(int node) const {
    std::vector<Link> out;
    if (!active(node)) return out;
    for (const auto& l : adj_[node])
        if (active(l.neighbor)) out.push_back(l);
    return out;
}

std::vector<int> TopologyGraph::neighbors(int node) const {
    std::vector<int> out;
    for (const auto& l : links(node)) out.push_back(l.neighbor);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int TopologyGraph::active_node_count() const {
    return static_cast<int>(std::count(active_.begin(), active_.end(), 1));
}

int TopologyGraph::active_edge_count() const {
    int n = 0;
    for (const auto& e : edges_)
        if (edge_active(e.id)) ++n;
    return n;
}

TopologyGraph build_graph(const DissectionMap& dm) {
    std::vector<TopologyGraph::Edge> edges;
    edges.reserve(dm.cutlines.size());
    for (const auto& c : dm.cutlines) edges.push_back({c.id, c.left_poly, c.right_poly});
    return TopologyGraph(static_cast<int>(dm.cells.size()), std::move(edges));
}

// ---------------------------------------------------------------------------
// Point location

namespace {

// Unchecked convex containment: -1 exterior, 0 boundary band, +1 interior.
int classify(const ConvexCell& cell, Point2 p, double eps) {
    const auto& v = cell.vertices;
    const std::size_t n = v.size();
    bool on_edge = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = v[i], b = v[(i + 1) % n];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        const double side = cross(b - a, p - a) / len;
        if (side < -eps) return -1;
        if (side <= eps) on_edge = true;
    }
    return on_edge ? 0 : 1;
}

}  // namespace

int locate(const DissectionMap& dm, Point2 p) {
    for (const auto& cell : dm.cells)
        if (classify(cell, p, dm.eps) >= 0) return cell.id;
    throw NotInFreeSpace("locate: point is not in free space");
}

bool in_cell(const DissectionMap& dm, int cell, Point2 p) {
    return classify(dm.cells.at(static_cast<std::size_t>(cell)), p, dm.eps) >= 0;
}

// ---------------------------------------------------------------------------
// Paths and codes

TopoPath TopoPath::from_nodes(std::vector<int> nodes) {
    TopoPath t;
    t.edges.assign(nodes.size(), -1);
    t.nodes = std::move(nodes);
    return t;
}

std::string CdtCode::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < path_.nodes.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(path_.nodes[i]);
    }
    return out;
}

CdtCode CdtCode::parse(std::string_view text) {
    std::vector<int> nodes;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view tok = text.substr(pos, comma - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
            throw ParseError("malformed code: '" + std::string(text) + "'");
        nodes.push_back(v);
        pos = comma + 1;
    }
    return CdtCode(TopoPath::from_nodes(std::move(nodes)));
}

CdtCode reduce(const TopoPath& t) {
    TopoPath out;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const int x = t.nodes[i];
        const int e = i < t.edges.size() ? t.edges[i] : -1;
        if (!out.nodes.empty() && out.nodes.back() == x) continue;
        if (out.nodes.size() >= 2 && out.nodes[out.nodes.size() - 2] == x) {
            out.nodes.pop_back();
            out.edges.pop_back();
            continue;
        }
        out.push(x, out.nodes.empty() ? -1 : e);
    }
    return CdtCode(std::move(out));
}

bool homotopic(const CdtCode& a, const CdtCode& b) {
    if (a.size() == 0 || b.size() == 0) throw InvalidInput("homotopic: empty code");
    if (a.start() != b.start() || a.end() != b.end())
        throw InvalidInput("homotopic: codes do not share endpoints");
    return a.nodes() == b.nodes();
}

TopoPath product(const TopoPath& f, const TopoPath& g) {
    if (f.empty() || g.empty()) throw InvalidInput("product: empty path");
    if (f.back() != g.front()) throw InvalidInput("product: junction mismatch");
    TopoPath out = f;
    for (std::size_t i = 1; i < g.nodes.size(); ++i) out.push(g.nodes[i], g.edges[i]);
    return out;
}

TopoPath inverse(const TopoPath& f) {
    TopoPath out;
    const std::size_t k = f.nodes.size();
    for (std::size_t j = 0; j < k; ++j) out.push(f.nodes[k - 1 - j], j == 0 ? -1 : f.edges[k - j]);
    return out;
}

bool is_no_rollback(const std::vector<int>& nodes) {
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i] == nodes[i - 1]) return false;
        if (i >= 2 && nodes[i] == nodes[i - 2]) return false;
    }
    return true;
}

bool has_duplicates(const std::vector<int>& nodes) {
    std::vector<int> s = nodes;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

// ---------------------------------------------------------------------------
// Encoder

namespace {

struct Tracer {
    const DissectionMap& dm;
    double eps_on;     // distance that counts as "on" a cutline
    double eps_vertex; // distance that counts as passing through a vertex
    double probe;      // look-ahead distance past a vertex
    TopoPath out;

    explicit Tracer(const DissectionMap& m) : dm(m) {
        const double diag = m.eps / 1e-9;
        eps_on = 1e-7 * diag;
        eps_vertex = 1e-7 * diag;
        probe = 1e-5 * diag;
    }

    int current() const { return out.nodes.back(); }

    void enter(int cell, int cut) {
        if (cell != current()) out.push(cell, cut);
    }

    // Largest t in [t0, 1] with p + t(q-p) still inside the cell; also
    // returns the limiting edge index (or -1 if the segment ends inside).
    std::pair<double, int> exit_param(const ConvexCell& cell, Point2 p, Point2 q, double t0) const {
        const auto& v = cell.vertices;
        const std::size_t n = v.size();
        const Point2 d = q - p;
        double t_exit = 1.0;
        int edge = -1;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = v[i], b = v[(i + 1) % n];
            const double len = distance(a, b);
            if (len == 0.0) continue;
            const double s0 = cross(b - a, p - a) / len;
            const double ds = cross(b - a, d) / len;
            // Edges the segment only grazes (stays within the band) never stop it.
            if (ds >= 0.0 || s0 + ds >= -eps_on) continue;
            t_exit = std::min(t_exit, std::max(s0 / -ds, t0));
            edge = 0;
        }
        if (edge < 0) return {1.0, -1};
        // Among the limiting edges (collinear ones can tie), the one whose
        // closed segment holds the exit point.
        const Point2 x = lerp(p, q, t_exit);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = v[i], b = v[(i + 1) % n];
            const double len = distance(a, b);
            if (len == 0.0) continue;
            const double s0 = cross(b - a, p - a) / len;
            const double ds = cross(b - a, d) / len;
            if (ds >= 0.0 || s0 + ds >= -eps_on) continue;
            const double dist = point_segment_distance(x, a, b);
            if (dist < best) {
                best = dist;
                edge = static_cast<int>(i);
            }
        }
        return {t_exit, edge};
    }

    // Breadth-first walk from `from` through cutlines passing within `tol`
    // of x, stopping at the first cell that contains `target`. Empty when no
    // such cell is reachable.
    std::optional<std::vector<std::pair<int, int>>> walk_around(int from, Point2 x, double tol,
                                                                 Point2 target) const {
        std::vector<int> prev(dm.cells.size(), -2), via(dm.cells.size(), -1);
        std::deque<int> queue{from};
        prev[from] = -1;
        int found = -1;
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            if (in_cell(dm, c, target)) {
                found = c;
                break;
            }
            for (int cid : dm.cells[c].cutline_ids) {
                const auto& cut = dm.cutlines[cid];
                if (point_segment_distance(x, cut.a, cut.b) > tol) continue;
                const int nb = cut.other(c);
                if (prev[nb] != -2) continue;
                prev[nb] = c;
                via[nb] = cid;
                queue.push_back(nb);
            }
        }
        if (found < 0) return std::nullopt;
        std::vector<std::pair<int, int>> steps;
        for (int c = found; c != from; c = prev[c]) steps.push_back({c, via[c]});
        std::reverse(steps.begin(), steps.end());
        return steps;
    }

    int cutline_on_edge(const ConvexCell& cell, Point2 a, Point2 b) const {
        for (int cid : cell.cutline_ids) {
            const auto& c = dm.cutlines[cid];
            if (point_segment_distance(a, c.a, c.b) <= eps_on && point_segment_distance(b, c.a, c.b) <= eps_on)
                return cid;
        }
        return -1;
    }

    void move_to(Point2 x, double tol, Point2 target, std::ptrdiff_t index) {
        const auto steps = walk_around(current(), x, tol, target);
        if (!steps) throw NotInFreeSpace("gamma: path leaves free space", index);
        for (auto [c, cid] : *steps) enter(c, cid);
    }

    void segment(Point2 p, Point2 q, std::ptrdiff_t index) {
        const double len = distance(p, q);
        if (len == 0.0) return;
        double t = 0.0;
        const int guard = 4 * static_cast<int>(dm.cells.size()) + 16;
        for (int iter = 0;; ++iter) {
            if (iter > guard) throw InternalError("gamma: no progress along segment");
            const ConvexCell& cell = dm.cells[current()];
            const auto [t_exit, edge] = exit_param(cell, p, q, t);
            if (edge < 0 || (1.0 - t_exit) * len <= eps_on) {
                // Settle on the cell holding q; short tails may still cross.
                if (!in_cell(dm, current(), q)) move_to(q, (1.0 - t) * len + eps_vertex, q, index);
                return;
            }
            const Point2 x = lerp(p, q, t_exit);

            const Point2 a = cell.vertices[edge];
            const Point2 b = cell.vertices[(edge + 1) % cell.vertices.size()];
            if (distance(x, a) > eps_vertex && distance(x, b) > eps_vertex) {
                // Through the interior of an edge: it must be a cutline.
                const int cid = cutline_on_edge(cell, a, b);
                if (cid < 0) throw NotInFreeSpace("gamma: path leaves free space", index);
                enter(dm.cutlines[cid].other(current()), cid);
                t = t_exit;
                continue;
            }
            // Through a vertex: look a little ahead and walk round the fan.
            const double t_probe = std::min(1.0, t_exit + probe / len);
            move_to(x, eps_vertex, lerp(p, q, t_probe), index);
            if (t_probe >= 1.0) return;
            t = t_probe;
        }
    }
};

}  // namespace

TopoPath gamma(const DissectionMap& dm, std::span<const Point2> f) {
    if (f.empty()) throw InvalidInput("gamma: empty polyline");
    Tracer tr(dm);
    int start = -1;
    try {
        start = locate(dm, f[0]);
    } catch (const NotInFreeSpace&) {
        throw NotInFreeSpace("gamma: path starts outside free space", 0);
    }
    tr.out.push(start, -1);
    for (std::size_t i = 1; i < f.size(); ++i) tr.segment(f[i - 1], f[i], static_cast<std::ptrdiff_t>(i - 1));
    return std::move(tr.out);
}

Polyline gamma_g(const DissectionMap& dm, const TopoPath& t) {
    if (t.empty()) throw InvalidInput("gamma_g: empty path");
    Polyline out{dm.cells[t.nodes[0]].centroid};
    for (std::size_t i = 1; i < t.nodes.size(); ++i) {
        int cid = i < t.edges.size() ? t.edges[i] : -1;
        if (cid < 0) {
            const auto found = dm.cutline_between(t.nodes[i - 1], t.nodes[i]);
            if (!found) throw InvalidInput("gamma_g: consecutive nodes are not adjacent");
            cid = *found;
        }
        out.push_back(dm.cutlines[cid].mid());
        out.push_back(dm.cells[t.nodes[i]].centroid);
    }
    return out;
}

}  // namespace cdt
