#include <algorithm>
#include <random>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/mapgen.hpp"
#include "cdt/topology.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cdt;

namespace {

TopoPath path_of(std::vector<int> nodes) { return TopoPath::from_nodes(std::move(nodes)); }

// Cells visited by dense samples along f, consecutive repeats collapsed.
// Returns false when a sample is outside every cell.
bool dense_cells(const DissectionMap& dm, const Polyline& f, int samples, std::vector<int>& out) {
    out.clear();
    for (std::size_t s = 0; s + 1 < f.size(); ++s)
        for (int k = 0; k <= samples; ++k) {
            int c;
            try {
                c = locate(dm, lerp(f[s], f[s + 1], double(k) / samples));
            } catch (const NotInFreeSpace&) {
                return false;
            }
            if (out.empty() || out.back() != c) out.push_back(c);
        }
    return true;
}

// Random expansion: insert (x,x) or (x,y,x) somewhere.
std::vector<int> expand(std::vector<int> v, const TopologyGraph& g, std::mt19937_64& rng) {
    const std::size_t i = rng() % v.size();
    const int x = v[i];
    if (rng() % 3 == 0) {
        v.insert(v.begin() + i, x);
    } else {
        const auto nb = g.neighbors(x);
        if (nb.empty()) return v;
        const int y = nb[rng() % nb.size()];
        v.insert(v.begin() + i + 1, {y, x});
    }
    return v;
}

struct Fixture {
    CdtMap map;
    const ComponentMap& part() const { return map.parts.front(); }
};

Fixture cluttered(std::uint64_t seed, int obstacles = 5) {
    auto gm = gen_cluttered({.width = 100, .height = 100, .obstacles = obstacles, .seed = seed});
    return {test::cdt_map(gm.grid)};
}

}  // namespace

TEST_CASE("build_graph") {
    auto sq = test::component_from_polygon(test::plain_polygon(test::square(0, 0, 4)));
    CHECK(sq.graph.node_count() == 1);
    CHECK(sq.graph.edges().empty());

    auto l = test::component_from_polygon(test::plain_polygon(test::l_hexagon()));
    CHECK(l.graph.node_count() == 2);
    REQUIRE(l.graph.edges().size() == 1);
    CHECK(l.graph.neighbors(0) == std::vector<int>{1});

    auto ring = test::ring_map();
    CHECK(ring.graph.node_count() - int(ring.graph.edges().size()) == 0);
}

TEST_CASE("Euler characteristic on generated maps") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto f = cluttered(seed, 1 + int(seed % 5));
        REQUIRE(f.map.parts.size() == 1);
        auto gm = gen_cluttered({.width = 100, .height = 100, .obstacles = 1 + int(seed % 5), .seed = seed});
        const auto& g = f.part().graph;
        CHECK(g.node_count() - int(g.edges().size()) == 1 - gm.obstacles);
    }
}

TEST_CASE("deactivated nodes drop out of the graph") {
    auto ring = test::ring_map();
    auto g = ring.graph;
    const int n = g.active_node_count(), e = g.active_edge_count();
    const int victim = 0;
    const int deg = int(g.links(victim).size());
    g.deactivate(victim);
    CHECK(g.active_node_count() == n - 1);
    CHECK(g.active_edge_count() == e - deg);
    for (int v = 0; v < g.node_count(); ++v)
        if (g.active(v)) {
            const auto nb = g.neighbors(v);
            CHECK(std::count(nb.begin(), nb.end(), victim) == 0);
        }
}

TEST_CASE("locate") {
    auto ring = test::ring_map();
    const auto& dm = ring.dm;
    for (const auto& c : dm.cells) CHECK(locate(dm, c.centroid) == c.id);
    for (const auto& cut : dm.cutlines) CHECK(locate(dm, cut.mid()) == std::min(cut.left_poly, cut.right_poly));
    CHECK_THROWS_AS(locate(dm, {15, 15}), NotInFreeSpace);
    CHECK_THROWS_AS(locate(dm, {-1, 5}), NotInFreeSpace);
    CHECK(in_cell(dm, locate(dm, {1, 1}), {1, 1}));
}

TEST_CASE("gamma examples") {
    auto l = test::component_from_polygon(test::plain_polygon(test::l_hexagon()));
    const int a = locate(l.dm, {0.2, 1.8}), b = locate(l.dm, {1.8, 0.2});
    REQUIRE(a != b);
    CHECK(gamma(l.dm, Polyline{{0.2, 1.8}, {0.3, 1.5}}).nodes == std::vector<int>{a});
    auto t = gamma(l.dm, Polyline{{0.2, 1.8}, {1.8, 0.2}, {0.2, 1.7}});
    CHECK(t.nodes == std::vector<int>{a, b, a});
    CHECK(t.edges[1] == 0);
    CHECK(t.edges[2] == 0);

    auto ring = test::ring_map();
    try {
        gamma(ring.dm, Polyline{{1, 1}, {5, 5}, {25, 25}});
        FAIL("no exception");
    } catch (const NotInFreeSpace& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("gamma follows random cell walks") {
    std::mt19937_64 rng(7);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto f = cluttered(seed);
        const auto& dm = f.part().dm;
        const auto& g = f.part().graph;
        for (int k = 0; k < 50; ++k) {
            auto w = test::random_walk_path(dm, g, test::random_cell(dm, rng), 1 + k % 12, rng);
            auto t = gamma(dm, w.polyline);
            CHECK(t.nodes == w.cells);
            CHECK(std::vector<int>(t.edges.begin() + 1, t.edges.end()) == w.cutlines);
        }
    }
}

TEST_CASE("gamma agrees with dense sampling on straight chords") {
    std::mt19937_64 rng(9);
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto f = cluttered(seed);
        const auto& dm = f.part().dm;
        for (int k = 0; k < 200; ++k) {
            const Point2 p = test::random_point_in_cell(dm.cells[test::random_cell(dm, rng)], rng);
            const Point2 q = test::random_point_in_cell(dm.cells[test::random_cell(dm, rng)], rng);
            std::vector<int> dense;
            const bool inside = dense_cells(dm, {p, q}, 20000, dense);
            try {
                auto t = gamma(dm, Polyline{p, q});
                CHECK(inside);
                CHECK(t.nodes == dense);
                ++compared;
            } catch (const NotInFreeSpace&) {
                CHECK_FALSE(inside);
            }
        }
    }
    CHECK(compared > 100);
}

TEST_CASE("gamma_g") {
    auto l = test::component_from_polygon(test::plain_polygon(test::l_hexagon()));
    const auto& dm = l.dm;
    CHECK(gamma_g(dm, path_of({1})) == Polyline{dm.cells[1].centroid});
    CHECK(gamma_g(dm, path_of({0, 1})) == Polyline{dm.cells[0].centroid, dm.cutlines[0].mid(), dm.cells[1].centroid});
    CHECK_THROWS_AS(gamma_g(dm, path_of({0, 0})), InvalidInput);
}

TEST_CASE("decoder round trip") {
    std::mt19937_64 rng(13);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto f = cluttered(seed);
        const auto& dm = f.part().dm;
        const auto& g = f.part().graph;
        for (int k = 0; k < 200; ++k) {
            auto nodes = test::random_code_nodes(g, int(rng() % g.node_count()), 1 + k % 30, rng);
            const CdtCode c = reduce(path_of(nodes));
            REQUIRE(c.nodes() == nodes);
            CHECK(reduce(gamma(dm, gamma_g(dm, c.path()))) == c);
        }
    }
}

TEST_CASE("reduce") {
    CHECK(reduce(path_of({4})).nodes() == std::vector<int>{4});
    CHECK(reduce(path_of({1, 2, 1, 3})).nodes() == std::vector<int>{1, 3});
    CHECK(reduce(path_of({1, 1, 2, 2, 2})).nodes() == std::vector<int>{1, 2});
    CHECK(reduce(path_of({1, 2, 3, 2, 1})).nodes() == std::vector<int>{1});
    CHECK(reduce(path_of({1, 2, 3, 2, 4})).nodes() == std::vector<int>{1, 2, 4});
}

TEST_CASE("reduce undoes random expansions and is idempotent") {
    std::mt19937_64 rng(17);
    auto f = cluttered(3);
    const auto& g = f.part().graph;
    for (int k = 0; k < 500; ++k) {
        auto nodes = test::random_code_nodes(g, int(rng() % g.node_count()), 1 + k % 20, rng);
        auto v = nodes;
        for (int e = 0; e < 50; ++e) v = expand(v, g, rng);
        const CdtCode r = reduce(path_of(v));
        CHECK(r.nodes() == nodes);
        CHECK(reduce(r.path()) == r);
        CHECK(is_no_rollback(r.nodes()));
    }
}

TEST_CASE("homotopic") {
    auto ring = test::ring_map();
    const auto& dm = ring.dm;
    // endpoints kept off the corner diagonals, which may be cutlines
    const Polyline left{{1, 3}, {1, 29}, {29, 27}}, right{{1, 3}, {29, 1}, {29, 27}};
    const CdtCode cl = reduce(gamma(dm, left)), cr = reduce(gamma(dm, right));
    CHECK(homotopic(cl, cl));
    CHECK_FALSE(homotopic(cl, cr));

    const Polyline wobble{{1, 3}, {1, 20}, {5, 25}, {1, 25}, {1, 29}, {29, 27}};
    CHECK(homotopic(cl, reduce(gamma(dm, wobble))));

    auto nodes = cl.nodes();
    if (nodes.size() >= 2) {
        nodes.insert(nodes.begin() + 1, {nodes[0], nodes[1]});
        CHECK(homotopic(cl, reduce(path_of(nodes))));
    }
    const CdtCode other = reduce(gamma(dm, Polyline{{1, 3}, {2, 4}}));
    if (other.end() != cl.end()) CHECK_THROWS_AS(homotopic(cl, other), InvalidInput);
}

TEST_CASE("product and inverse") {
    const auto f = path_of({1, 2, 3});
    CHECK(product(f, path_of({3})).nodes == f.nodes);
    CHECK(reduce(product(f, inverse(f))).nodes() == std::vector<int>{1});
    CHECK(product(path_of({1, 2}), path_of({2, 3})).nodes == std::vector<int>{1, 2, 3});
    CHECK(inverse(f).nodes == std::vector<int>{3, 2, 1});
    CHECK_THROWS_AS(product(path_of({1, 2}), path_of({3})), InvalidInput);
}

TEST_CASE("code text form") {
    const CdtCode c = reduce(path_of({7, 3, 12}));
    CHECK(c.to_string() == "7,3,12");
    CHECK(CdtCode::parse("7,3,12") == c);
    CHECK(CdtCode::parse(" 7, 3 ,12 ") == c);
    CHECK_THROWS_AS(CdtCode::parse("7,,3"), ParseError);
    CHECK_THROWS_AS(CdtCode::parse("a"), ParseError);
    CHECK(has_duplicates({1, 2, 1}));
    CHECK_FALSE(has_duplicates({1, 2, 3}));
    CHECK_FALSE(is_no_rollback({1, 2, 1}));
    CHECK_FALSE(is_no_rollback({1, 1}));
    CHECK(is_no_rollback({1, 2, 3, 1}));
}
