#include "cdt/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "cdt/errors.hpp"

namespace cdt {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::cdt: return "cdt";
        case Variant::undecoupled: return "cdt-undecoupled";
        case Variant::noprune: return "cdt-noprune";
        case Variant::noalpha: return "cdt-noalpha";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::cdt, Variant::undecoupled, Variant::noprune, Variant::noalpha})
        if (name == variant_name(v)) return v;
    return std::nullopt;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::same_cell: return "same_cell";
        case Termination::reduced: return "reduced";
        case Termination::iterations: return "iterations";
        case Termination::target: return "target";
        case Termination::no_solution: return "no_solution";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Sampling

double CutlineStats::weight(std::size_t i, const SamplerParams& p) const {
    if (!enabled[i] || mu[i] <= 0) return 0.0;
    const double fresh = eta[i] == 0 ? 1.0 + p.alpha : 1.0;
    return fresh * std::pow(p.beta, kappa[i]);
}

CutlineSampler::CutlineSampler(const DissectionMap& dm, SamplerParams params)
    : dm_(&dm), params_(params), stats_(dm.cutlines.size()) {}

void CutlineSampler::rebuild() {
    cumulative_.resize(stats_.mu.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < cumulative_.size(); ++i) {
        sum += stats_.weight(i, params_);
        cumulative_[i] = sum;
    }
    dirty_ = false;
}

double CutlineSampler::total_weight() {
    if (dirty_) rebuild();
    return cumulative_.empty() ? 0.0 : cumulative_.back();
}

double CutlineSampler::probability(int cutline) {
    const double total = total_weight();
    if (total <= 0.0) return 0.0;
    return stats_.weight(static_cast<std::size_t>(cutline), params_) / total;
}

std::pair<int, Point2> CutlineSampler::sample(std::mt19937_64& rng) {
    const double total = total_weight();
    if (!(total > 0.0)) throw InternalError("sample: every cutline weight is zero");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double rho1 = unit(rng);
    const double rho2 = unit(rng) * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), rho2);
    if (it == cumulative_.end()) --it;
    // Skip zero-weight entries that share the cumulative value.
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    while (stats_.weight(i, params_) == 0.0 && i + 1 < cumulative_.size()) ++i;
    while (stats_.weight(i, params_) == 0.0 && i > 0) --i;
    const Cutline& c = dm_->cutlines[i];
    return {static_cast<int>(i), c.at(rho1)};
}

// ---------------------------------------------------------------------------
// Tree

PlanTree::PlanTree(const DissectionMap& dm, Point2 root, int root_cell) : cell_nodes(dm.cells.size()) {
    TreeNode n;
    n.point = root;
    n.cell_a = root_cell;
    n.edge_cell = root_cell;
    nodes.push_back(n);
    children.emplace_back();
    cell_nodes[root_cell].push_back(0);
}

namespace {

bool has_cell(const TreeNode& n, int cell) { return cell >= 0 && (n.cell_a == cell || n.cell_b == cell); }

int shared_cell(const TreeNode& parent, const TreeNode& child) {
    const bool a = has_cell(parent, child.cell_a), b = has_cell(parent, child.cell_b);
    if (a && b) {
        if (parent.edge_cell == child.cell_a || parent.edge_cell == child.cell_b) return parent.edge_cell;
        return std::min(child.cell_a, child.cell_b);
    }
    if (a) return child.cell_a;
    if (b) return child.cell_b;
    return -1;
}

}  // namespace

int PlanTree::add(const DissectionMap& dm, Point2 p, int cutline, int parent) {
    const Cutline& c = dm.cutlines[cutline];
    TreeNode n;
    n.point = p;
    n.cutline = cutline;
    n.cell_a = std::min(c.left_poly, c.right_poly);
    n.cell_b = std::max(c.left_poly, c.right_poly);
    n.parent = parent;
    n.cost = nodes[parent].cost + distance(nodes[parent].point, p);
    n.edge_cell = shared_cell(nodes[parent], n);
    if (n.edge_cell < 0) throw InternalError("PlanTree::add: parent does not share a cell");
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(n);
    children.emplace_back();
    children[parent].push_back(id);
    cell_nodes[n.cell_a].push_back(id);
    cell_nodes[n.cell_b].push_back(id);
    return id;
}

void PlanTree::reparent(int node, int parent, std::vector<int>* touched) {
    TreeNode& n = nodes[node];
    auto& siblings = children[n.parent];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    children[parent].push_back(node);
    n.parent = parent;
    n.edge_cell = shared_cell(nodes[parent], n);
    if (n.edge_cell < 0) throw InternalError("PlanTree::reparent: parent does not share a cell");
    // Costs below the moved node follow the new root path.
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        TreeNode& x = nodes[v];
        x.cost = nodes[x.parent].cost + distance(nodes[x.parent].point, x.point);
        if (touched) touched->push_back(v);
        for (int c : children[v]) stack.push_back(c);
    }
}

bool PlanTree::is_ancestor(int ancestor, int node) const {
    for (int v = node; v >= 0; v = nodes[v].parent)
        if (v == ancestor) return true;
    return false;
}

std::vector<int> PlanTree::path_to(int node) const {
    std::vector<int> out;
    for (int v = node; v >= 0; v = nodes[v].parent) out.push_back(v);
    std::reverse(out.begin(), out.end());
    return out;
}

TopoPath PlanTree::cells_to(const DissectionMap&, int node) const {
    TopoPath t;
    const auto ids = path_to(node);
    t.push(nodes[0].cell_a, -1);
    for (std::size_t i = 1; i < ids.size(); ++i) {
        const int cell = nodes[ids[i]].edge_cell;
        if (cell != t.back()) t.push(cell, nodes[ids[i - 1]].cutline);
    }
    return t;
}

std::vector<int> find_nodes_near(const PlanTree& tree, const DissectionMap& dm, int cutline) {
    const Cutline& c = dm.cutlines[cutline];
    const auto& a = tree.cell_nodes[c.left_poly];
    const auto& b = tree.cell_nodes[c.right_poly];
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> find_nodes_near_node(const PlanTree& tree, int node) {
    const TreeNode& n = tree.nodes[node];
    std::vector<int> out;
    const auto& a = tree.cell_nodes[n.cell_a];
    if (n.cell_b < 0) {
        out = a;
    } else {
        const auto& b = tree.cell_nodes[n.cell_b];
        out.reserve(a.size() + b.size());
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    }
    out.erase(std::remove(out.begin(), out.end(), node), out.end());
    return out;
}

int find_closest(const PlanTree& tree, Point2 x, const std::vector<int>& near) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int id : near) {
        const double c = tree.nodes[id].cost + distance(tree.nodes[id].point, x);
        if (c < best_cost || (c == best_cost && id < best)) {
            best_cost = c;
            best = id;
        }
    }
    return best;
}

std::vector<int> rewire(std::vector<int>& queue, PlanTree& tree) {
    std::deque<int> q;
    std::vector<char>& queued = tree.queued;
    queued.resize(tree.nodes.size(), 0);
    auto enqueue = [&](int id) {
        if (!queued[id]) {
            queued[id] = 1;
            q.push_back(id);
        }
    };
    for (int id : queue) enqueue(id);
    queue.clear();
    std::vector<int> changed, touched;
    auto consider = [&](int r, int id) {
        if (id == r || id == 0) return;
        const TreeNode& xr = tree.nodes[r];
        const double cost_new = xr.cost + distance(xr.point, tree.nodes[id].point);
        if (tree.nodes[id].cost > cost_new && !tree.is_ancestor(id, r)) {
            touched.clear();
            tree.reparent(id, r, &touched);
            // Every node whose cost dropped may now improve its neighbours.
            for (int t : touched) {
                changed.push_back(t);
                enqueue(t);
            }
        }
    };
    while (!q.empty()) {
        const int r = q.front();
        q.pop_front();
        queued[r] = 0;
        const int ca = tree.nodes[r].cell_a, cb = tree.nodes[r].cell_b;
        // Index loops: reparenting never changes cell membership lists.
        const auto& a = tree.cell_nodes[ca];
        for (std::size_t i = 0; i < a.size(); ++i) consider(r, a[i]);
        if (cb >= 0) {
            const auto& b = tree.cell_nodes[cb];
            for (std::size_t i = 0; i < b.size(); ++i) {
                const TreeNode& n = tree.nodes[b[i]];
                if (n.cell_a == ca || n.cell_b == ca) continue;  // already seen in a
                consider(r, b[i]);
            }
        }
    }
    std::sort(changed.begin(), changed.end());
    changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
    return changed;
}

bool near_goal(const DissectionMap& dm, int cutline, int goal_cell) {
    const Cutline& c = dm.cutlines[cutline];
    return c.left_poly == goal_cell || c.right_poly == goal_cell;
}

CdtCode backtrack_code(const PlanTree& tree, const DissectionMap& dm, int node, int goal_cell) {
    TopoPath t = tree.cells_to(dm, node);
    if (t.back() != goal_cell) t.push(goal_cell, tree.nodes[node].cutline);
    return reduce(t);
}

// ---------------------------------------------------------------------------
// Branch reduction

namespace {

// Active links of `node` leading outside `visited`.
std::vector<TopologyGraph::Link> open_links(const TopologyGraph& g, int node, const std::vector<int>& visited) {
    std::vector<TopologyGraph::Link> out;
    for (const auto& l : g.links(node))
        if (std::find(visited.begin(), visited.end(), l.neighbor) == visited.end()) out.push_back(l);
    return out;
}

// Follows the corridor from `start` while exactly one way leads on.
// Returns true if it reached `target`.
bool follow_corridor(const TopologyGraph& g, int start, int target, TopoPath& f) {
    f = TopoPath{};
    f.push(start, -1);
    while (true) {
        const auto links = open_links(g, f.back(), f.nodes);
        if (links.size() != 1) return false;
        f.push(links[0].neighbor, links[0].edge);
        if (links[0].neighbor == target) return true;
    }
}

}  // namespace

ReduceResult reduce_branches(const TopologyGraph& g, int init_cell, int goal_cell) {
    ReduceResult out{g, std::nullopt};
    TopologyGraph& h = out.graph;
    for (int x = 0; x < g.node_count(); ++x) {
        if (g.links(x).size() != 1) continue;
        int cur = x;
        while (h.active(cur) && h.links(cur).size() == 1) {
            if (cur == init_cell || cur == goal_cell) break;
            const int next = h.links(cur)[0].neighbor;
            h.deactivate(cur);
            cur = next;
        }
    }
    if (init_cell == goal_cell) {
        out.code = CdtCode(TopoPath::from_nodes({init_cell}));
        return out;
    }
    TopoPath f_init, f_goal;
    if (follow_corridor(h, init_cell, goal_cell, f_init)) {
        out.code = reduce(f_init);
        return out;
    }
    if (follow_corridor(h, goal_cell, init_cell, f_goal)) {
        out.code = reduce(inverse(f_goal));
        return out;
    }
    if (f_init.back() == f_goal.back()) out.code = reduce(product(f_init, inverse(f_goal)));
    return out;
}

// ---------------------------------------------------------------------------
// Planner

std::optional<double> time_to_reach(const PlanResult& r, double target) {
    for (const auto& imp : r.improvements)
        if (imp.length <= target) return imp.time_us;
    return std::nullopt;
}

int CdtMap::component_of(Point2 p) const {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
            locate(parts[i].dm, p);
            return static_cast<int>(i);
        } catch (const NotInFreeSpace&) {
        }
    }
    return -1;
}

CdtMap build_map(const MapGeometry& geometry) {
    CdtMap m;
    for (const auto& comp : geometry.components) {
        ComponentMap part;
        part.dm = decompose(comp.polygon);
        part.dm.component = comp.id;
        part.graph = build_graph(part.dm);
        m.parts.push_back(std::move(part));
    }
    return m;
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

struct Planner {
    const Task& task;
    const DissectionMap& dm;
    const PlannerOptions& opts;
    Clock::time_point t0;
    PlanResult result;
    int goal_cell = -1;

    Planner(const Task& t, const DissectionMap& d, const PlannerOptions& o)
        : task(t), dm(d), opts(o), t0(Clock::now()) {}

    void improve(Polyline path, CdtCode code, double length, int iteration) {
        const double now = micros_since(t0);
        if (!result.success) result.t_init_us = now;
        result.success = true;
        result.best_path = std::move(path);
        result.best_code = std::move(code);
        result.best_length = length;
        result.improvements.push_back({iteration, now, length});
    }

    void solve_direct(const CdtCode& code) {
        const ClassPath cp = shortest_in_class(dm, code, task.x_init, task.x_goal, opts.solver);
        result.classes.push_back({code, cp.length, cp.path, 0, micros_since(t0)});
        improve(cp.path, code, cp.length, 0);
    }

    int tree_invariant_scan(const PlanTree& tree) const {
        int bad = 0;
        for (std::size_t i = 0; i < tree.nodes.size(); ++i)
            if (has_duplicates(tree.cells_to(dm, static_cast<int>(i)).nodes)) ++bad;
        return bad;
    }

    Polyline tree_path(const PlanTree& tree, int node) const {
        Polyline p;
        for (int id : tree.path_to(node)) p.push_back(tree.nodes[id].point);
        p.push_back(task.x_goal);
        return p;
    }

    void run(const TopologyGraph& g) {
        const int init_cell = locate(dm, task.x_init);
        goal_cell = locate(dm, task.x_goal);
        result.cutlines_total = static_cast<int>(dm.cutlines.size());
        result.cutlines_considered = result.cutlines_total;

        if (in_cell(dm, init_cell, task.x_goal)) {
            const CdtCode code(TopoPath::from_nodes({init_cell}));
            result.classes.push_back({code, distance(task.x_init, task.x_goal), {task.x_init, task.x_goal}, 0, 0.0});
            improve({task.x_init, task.x_goal}, code, distance(task.x_init, task.x_goal), 0);
            result.termination = Termination::same_cell;
            return;
        }

        ReduceResult rr{g, std::nullopt};
        if (opts.variant != Variant::noprune) rr = reduce_branches(g, init_cell, goal_cell);
        result.cutlines_considered = rr.graph.active_edge_count();
        if (rr.code && opts.variant != Variant::undecoupled) {
            solve_direct(*rr.code);
            result.termination = Termination::reduced;
            return;
        }

        SamplerParams sp = opts.sampler;
        if (opts.variant == Variant::noalpha) sp.alpha = 0.0;
        CutlineSampler sampler(dm, sp);
        CutlineStats& st = sampler.stats();
        for (std::size_t i = 0; i < dm.cutlines.size(); ++i) st.enabled[i] = rr.graph.edge_active(static_cast<int>(i));

        PlanTree tree(dm, task.x_init, init_cell);
        auto count_node_cells = [&](int node) {
            const TreeNode& n = tree.nodes[node];
            std::vector<int> cuts;
            for (int cell : {n.cell_a, n.cell_b}) {
                if (cell < 0) continue;
                for (int cid : dm.cells[cell].cutline_ids) cuts.push_back(cid);
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            for (int cid : cuts)
                if (st.mu[cid]++ == 0) sampler.invalidate();
        };
        count_node_cells(0);

        std::mt19937_64 rng(task.seed);
        std::vector<int> q_r;
        std::vector<int> q_g;
        std::vector<char> in_q_g(1, 0), dirty(1, 0);
        std::set<std::vector<int>> seen;
        std::vector<int> pending;

        for (int it = 0; it < task.iterations; ++it) {
            const auto [cid, x] = sampler.sample(rng);
            if (st.eta[cid]++ == 0) sampler.invalidate();
            const auto near = find_nodes_near(tree, dm, cid);
            if (near.empty()) throw InternalError("plan: sampled cutline has no nearby nodes");
            const int parent = find_closest(tree, x, near);
            const int id = tree.add(dm, x, cid, parent);
            in_q_g.push_back(0);
            dirty.push_back(0);
            count_node_cells(id);

            q_r.push_back(id);
            if (near_goal(dm, cid, goal_cell)) {
                q_g.push_back(id);
                in_q_g[id] = 1;
                dirty[id] = 1;
                pending.push_back(id);
            } else {
                for (int changed : rewire(q_r, tree)) {
                    if (in_q_g[changed] && !dirty[changed]) {
                        dirty[changed] = 1;
                        pending.push_back(changed);
                    }
                }
            }

            std::sort(pending.begin(), pending.end());
            for (int e : pending) {
                dirty[e] = 0;
                visit_goal_node(tree, e, it, seen, sampler);
            }
            pending.clear();

            if (opts.debug_checks) result.tree_invariant_violations += tree_invariant_scan(tree);
            result.iterations_used = it + 1;
            if (result.success && opts.stop_length && result.best_length <= *opts.stop_length) {
                result.termination = Termination::target;
                break;
            }
        }
        if (result.termination != Termination::target)
            result.termination = result.success ? Termination::iterations : Termination::no_solution;
        if (opts.keep_tree) result.tree = std::move(tree);
    }

    void visit_goal_node(const PlanTree& tree, int e, int iteration, std::set<std::vector<int>>& seen,
                         CutlineSampler& sampler) {
        const CdtCode code = backtrack_code(tree, dm, e, goal_cell);
        const bool fresh = seen.insert(code.nodes()).second;
        if (opts.variant == Variant::undecoupled) {
            const double len = tree.nodes[e].cost + distance(tree.nodes[e].point, task.x_goal);
            if (fresh) result.classes.push_back({code, len, tree_path(tree, e), iteration, micros_since(t0)});
            if (!result.success || len < result.best_length) improve(tree_path(tree, e), code, len, iteration);
            return;
        }
        if (!fresh) return;
        const auto& edges = code.path().edges;
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (edges[i] >= 0) ++sampler.stats().kappa[edges[i]];
        sampler.invalidate();
        const ClassPath cp = shortest_in_class(dm, code, task.x_init, task.x_goal, opts.solver);
        result.classes.push_back({code, cp.length, cp.path, iteration, micros_since(t0)});
        if (!result.success || cp.length < result.best_length) improve(cp.path, code, cp.length, iteration);
    }
};

}  // namespace

PlanResult plan(const Task& task, const DissectionMap& dm, const TopologyGraph& g, const PlannerOptions& opts) {
    if (task.iterations < 0) throw InvalidInput("plan: negative iteration count");
    if (!(opts.sampler.beta > 0.0 && opts.sampler.beta <= 1.0)) throw InvalidInput("plan: beta must be in (0, 1]");
    Planner p(task, dm, opts);
    p.run(g);
    p.result.elapsed_us = micros_since(p.t0);
    return std::move(p.result);
}

PlanResult plan(const Task& task, const CdtMap& map, const PlannerOptions& opts) {
    const int a = map.component_of(task.x_init);
    const int b = map.component_of(task.x_goal);
    if (a < 0) throw NotInFreeSpace("plan: start is not in free space");
    if (b < 0) throw NotInFreeSpace("plan: goal is not in free space");
    if (a != b) throw Unreachable("plan: start and goal lie in different free-space components");
    const auto& part = map.parts[static_cast<std::size_t>(a)];
    return plan(task, part.dm, part.graph, opts);
}

}  // namespace cdt
