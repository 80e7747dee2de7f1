#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cdt/decomposition.hpp"
#include "cdt/geometry.hpp"

namespace cdt {

/// One node per convex cell, one edge per cutline. Nodes can be switched off
/// to represent a pruned copy; edges touching an inactive node are ignored.
class TopologyGraph {
public:
    struct Edge {
        int id = 0;  // cutline id
        int u = 0;
        int v = 0;
        int other(int node) const { return node == u ? v : u; }
    };
    struct Link {
        int neighbor = 0;
        int edge = 0;
    };

    TopologyGraph() = default;
    TopologyGraph(int nodes, std::vector<Edge> edges);

    int node_count() const { return static_cast<int>(adj_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int id) const { return edges_[id]; }

    bool active(int node) const { return active_[node] != 0; }
    bool edge_active(int id) const { return active(edges_[id].u) && active(edges_[id].v); }
    void deactivate(int node) { active_[node] = 0; }

    /// Active links of a node (one per cutline, so parallel edges repeat neighbours).
    std::vector<Link> links(int node) const;
    /// Distinct active neighbours, ascending.
    std::vector<int> neighbors(int node) const;
    int active_node_count() const;
    int active_edge_count() const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<Link>> adj_;
    std::vector<char> active_;
};

TopologyGraph build_graph(const DissectionMap& dm);

/// Cell containing p. Points on a shared border resolve to the lowest cell id.
/// Throws NotInFreeSpace when p lies outside every cell.
int locate(const DissectionMap& dm, Point2 p);

/// True when p lies in the closed cell (within dm.eps).
bool in_cell(const DissectionMap& dm, int cell, Point2 p);

/// Node sequence in the topology graph. `edges[i]` is the cutline crossed to
/// enter `nodes[i]` (-1 for the first node, or when unknown).
struct TopoPath {
    std::vector<int> nodes;
    std::vector<int> edges;

    static TopoPath from_nodes(std::vector<int> nodes);
    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
    int front() const { return nodes.front(); }
    int back() const { return nodes.back(); }
    void push(int node, int edge) {
        nodes.push_back(node);
        edges.push_back(edge);
    }
};

/// Reduced (no-rollback) topology path; the homotopy class key.
class CdtCode {
public:
    CdtCode() = default;
    explicit CdtCode(TopoPath reduced) : path_(std::move(reduced)) {}

    const TopoPath& path() const { return path_; }
    const std::vector<int>& nodes() const { return path_.nodes; }
    int start() const { return path_.front(); }
    int end() const { return path_.back(); }
    std::size_t size() const { return path_.size(); }

    /// Comma separated node ids, e.g. "7,3,12".
    std::string to_string() const;
    /// Parses the text form; edge ids are left unknown.
    static CdtCode parse(std::string_view text);

    friend bool operator==(const CdtCode& a, const CdtCode& b) { return a.nodes() == b.nodes(); }
    friend bool operator<(const CdtCode& a, const CdtCode& b) { return a.nodes() < b.nodes(); }

private:
    TopoPath path_;
};

/// Cells traversed by a polyline, with the crossed cutlines.
/// Throws NotInFreeSpace (index = first offending segment) if f leaves the
/// component.
TopoPath gamma(const DissectionMap& dm, std::span<const Point2> f);

/// Canonical realization through cell centroids and cutline midpoints.
Polyline gamma_g(const DissectionMap& dm, const TopoPath& t);

/// Removes every (x,x) and (x,y,x) fragment.
CdtCode reduce(const TopoPath& t);

/// True when both codes name the same homotopy class. Throws InvalidInput
/// when the endpoints differ.
bool homotopic(const CdtCode& a, const CdtCode& b);

TopoPath product(const TopoPath& f, const TopoPath& g);
TopoPath inverse(const TopoPath& f);

/// True when no (x,x) or (x,y,x) window occurs.
bool is_no_rollback(const std::vector<int>& nodes);
bool has_duplicates(const std::vector<int>& nodes);

}  // namespace cdt
