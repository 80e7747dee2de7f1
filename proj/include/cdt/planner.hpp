#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cdt/decomposition.hpp"
#include "cdt/map_ingest.hpp"
#include "cdt/shortest_path.hpp"
#include "cdt/topology.hpp"

namespace cdt {

struct Task {
    Point2 x_init;
    Point2 x_goal;
    int iterations = 1000;
    std::uint64_t seed = 1;
};

struct SamplerParams {
    double alpha = 1e9;
    double beta = 0.2;
};

enum class Variant {
    cdt,          // full planner
    undecoupled,  // best = raw tree path, no per-class solve
    noprune,      // no branch reduction
    noalpha,      // alpha term dropped from the sampling weights
};

const char* variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct PlannerOptions {
    SamplerParams sampler;
    Variant variant = Variant::cdt;
    /// Scan every root path for repeated cells after each iteration.
    bool debug_checks = false;
    /// Keep the final tree in the result (for drawing).
    bool keep_tree = false;
    /// End the run once the best length is at most this value.
    std::optional<double> stop_length;
    SolverConfig solver;
};

/// Per-cutline counters behind the sampling weights.
struct CutlineStats {
    std::vector<int> mu;     // tree nodes in the two adjacent cells
    std::vector<int> eta;    // samples drawn on the cutline
    std::vector<int> kappa;  // occurrences in recorded classes
    std::vector<char> enabled;

    explicit CutlineStats(std::size_t n = 0) : mu(n, 0), eta(n, 0), kappa(n, 0), enabled(n, 1) {}
    double weight(std::size_t i, const SamplerParams& p) const;
};

/// Roulette-wheel sampler over cutlines. The cumulative table is rebuilt
/// only when a weight changes.
class CutlineSampler {
public:
    CutlineSampler(const DissectionMap& dm, SamplerParams params);

    CutlineStats& stats() { return stats_; }
    const CutlineStats& stats() const { return stats_; }
    /// Call after changing any counter that affects a weight.
    void invalidate() { dirty_ = true; }
    double total_weight();
    double probability(int cutline);

    /// (cutline id, point on it). Throws InternalError when all weights are zero.
    std::pair<int, Point2> sample(std::mt19937_64& rng);

private:
    void rebuild();

    const DissectionMap* dm_;
    SamplerParams params_;
    CutlineStats stats_;
    std::vector<double> cumulative_;
    bool dirty_ = true;
};

struct TreeNode {
    Point2 point;
    int cutline = -1;  // -1 for the root
    int cell_a = -1;   // cells the node belongs to
    int cell_b = -1;
    int parent = -1;
    double cost = 0.0;
    int edge_cell = -1;  // cell holding the segment from the parent
};

struct PlanTree {
    std::vector<TreeNode> nodes;
    std::vector<std::vector<int>> cell_nodes;
    std::vector<std::vector<int>> children;
    std::vector<char> queued;  // rewire scratch

    PlanTree() = default;
    PlanTree(const DissectionMap& dm, Point2 root, int root_cell);

    int add(const DissectionMap& dm, Point2 p, int cutline, int parent);
    /// Moves `node` under `parent` and refreshes the costs of its subtree
    /// (appending every updated node to `touched`).
    void reparent(int node, int parent, std::vector<int>* touched = nullptr);
    bool is_ancestor(int ancestor, int node) const;
    /// Root-to-node sequence of node ids.
    std::vector<int> path_to(int node) const;
    /// Cells visited by the root path (consecutive repeats collapsed) with the
    /// cutline crossed into each.
    TopoPath cells_to(const DissectionMap& dm, int node) const;
};

/// Tree nodes that lie in either cell adjacent to `cutline`.
std::vector<int> find_nodes_near(const PlanTree& tree, const DissectionMap& dm, int cutline);
/// Tree nodes sharing a cell with `node`.
std::vector<int> find_nodes_near_node(const PlanTree& tree, int node);

/// argmin cost + distance over `near`; ties go to the lower id.
int find_closest(const PlanTree& tree, Point2 x, const std::vector<int>& near);

/// FIFO rewiring from the nodes already in `queue`. Returns the nodes whose
/// parent or cost changed, ascending.
std::vector<int> rewire(std::vector<int>& queue, PlanTree& tree);

/// True when the cutline borders the goal cell.
bool near_goal(const DissectionMap& dm, int cutline, int goal_cell);

/// Reduced code of the tree path to `node` followed by the straight segment
/// to the goal (which lies in `goal_cell`).
CdtCode backtrack_code(const PlanTree& tree, const DissectionMap& dm, int node, int goal_cell);

struct ReduceResult {
    TopologyGraph graph;
    std::optional<CdtCode> code;
};

/// Strips singly-connected cells (except the two endpoint cells) and tries to
/// read off the optimal code from the corridors around the endpoint cells.
ReduceResult reduce_branches(const TopologyGraph& g, int init_cell, int goal_cell);

struct ClassRecord {
    CdtCode code;
    double length = 0.0;
    Polyline path;
    int iteration = 0;
    double time_us = 0.0;
};

struct Improvement {
    int iteration = 0;
    double time_us = 0.0;
    double length = 0.0;
};

enum class Termination { same_cell, reduced, iterations, target, no_solution };
const char* termination_name(Termination t);

struct PlanResult {
    bool success = false;
    Polyline best_path;
    CdtCode best_code;
    double best_length = 0.0;
    std::vector<ClassRecord> classes;
    std::vector<Improvement> improvements;
    std::optional<double> t_init_us;
    int iterations_used = 0;
    Termination termination = Termination::no_solution;
    int cutlines_total = 0;
    int cutlines_considered = 0;
    int tree_invariant_violations = 0;
    double elapsed_us = 0.0;
    std::optional<PlanTree> tree;
};

/// First time the best length dropped to at most `target`, if it did.
std::optional<double> time_to_reach(const PlanResult& r, double target);

/// One connected free-space component with its dissection and graph.
struct ComponentMap {
    DissectionMap dm;
    TopologyGraph graph;
};

/// All components of a map.
struct CdtMap {
    std::vector<ComponentMap> parts;

    /// Component containing p, or -1.
    int component_of(Point2 p) const;
};

CdtMap build_map(const MapGeometry& geometry);

PlanResult plan(const Task& task, const DissectionMap& dm, const TopologyGraph& g, const PlannerOptions& opts = {});
/// Checks that both endpoints share a component first; throws Unreachable if
/// not and NotInFreeSpace when an endpoint is in no component.
PlanResult plan(const Task& task, const CdtMap& map, const PlannerOptions& opts = {});

}  // namespace cdt
