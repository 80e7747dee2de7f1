#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/mapgen.hpp"
#include "cdt/oracles.hpp"
#include "cdt/planner.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cdt;

namespace {

TopologyGraph make_graph(int n, const std::vector<std::pair<int, int>>& e) {
    std::vector<TopologyGraph::Edge> edges;
    for (std::size_t i = 0; i < e.size(); ++i) edges.push_back({int(i), e[i].first, e[i].second});
    return TopologyGraph(n, edges);
}

double cost_from_scratch(const PlanTree& t, int node) {
    double c = 0;
    const auto ids = t.path_to(node);
    for (std::size_t i = 1; i < ids.size(); ++i) c += distance(t.nodes[ids[i - 1]].point, t.nodes[ids[i]].point);
    return c;
}

Polyline root_path(const PlanTree& t, int node) {
    Polyline p;
    for (int id : t.path_to(node)) p.push_back(t.nodes[id].point);
    return p;
}

void check_tree(const PlanTree& t, const DissectionMap& dm) {
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const int id = int(i);
        CHECK(t.nodes[i].cost == doctest::Approx(cost_from_scratch(t, id)).epsilon(1e-12));
        if (i == 0) continue;
        auto f = root_path(t, id);
        CHECK_FALSE(has_duplicates(gamma(dm, f).nodes));
    }
}

// Pixel centres off the map lattice, so diagonal steps never pass exactly
// through a cell corner.
Raster offset_raster(const DissectionMap& dm, const OccupancyGrid& g) {
    return raster_from_dissection(dm, 2 * g.width + 1, 2 * g.height + 1);
}

const Point2 kRingStart{1, 3}, kRingGoal{29, 27};
const double kRingLeft = distance(kRingStart, {10, 20}) + distance({10, 20}, kRingGoal);
const double kRingRight = distance(kRingStart, {20, 10}) + distance({20, 10}, kRingGoal);

}  // namespace

TEST_CASE("reduce_branches on hand-built graphs") {
    // tree: 0-1-2-3 with branches 1-4, 2-5-6
    auto tree = make_graph(7, {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {2, 5}, {5, 6}});
    auto r = reduce_branches(tree, 0, 3);
    REQUIRE(r.code);
    CHECK(r.code->nodes() == std::vector<int>{0, 1, 2, 3});
    CHECK_FALSE(r.graph.active(4));
    CHECK_FALSE(r.graph.active(6));
    CHECK_FALSE(r.graph.active(5));

    r = reduce_branches(tree, 4, 6);
    REQUIRE(r.code);
    CHECK(r.code->nodes() == std::vector<int>{4, 1, 2, 5, 6});

    // cycle: nothing to strip, no code
    auto cycle = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    r = reduce_branches(cycle, 0, 3);
    CHECK_FALSE(r.code);
    CHECK(r.graph.active_node_count() == 6);

    // cycle with a tail towards each endpoint: tails lead in, code undecided
    auto tails = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 1}, {3, 4}, {2, 5}});
    r = reduce_branches(tails, 0, 4);
    CHECK_FALSE(r.code);
    CHECK_FALSE(r.graph.active(5));
    CHECK(r.graph.active(0));
    CHECK(r.graph.active(4));

    // both endpoints hang off the same cell of a cycle
    auto same = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 1}, {1, 4}, {4, 5}});
    r = reduce_branches(same, 0, 5);
    REQUIRE(r.code);
    CHECK(r.code->nodes() == std::vector<int>{0, 1, 4, 5});

    r = reduce_branches(cycle, 2, 2);
    REQUIRE(r.code);
    CHECK(r.code->nodes() == std::vector<int>{2});
}

TEST_CASE("reduce_branches on a simply connected maze gives the oracle's class") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto gm = gen_maze({.cols = 6, .rows = 6, .corridor = 6, .wall = 2, .seed = seed});
        auto map = test::cdt_map(gm.grid);
        REQUIRE(map.parts.size() == 1);
        const auto& dm = map.parts[0].dm;
        // generator endpoints sit on the lattice, where a cutline may pass
        const Point2 s = gm.start + Point2{0.31, 0.17}, e = gm.goal + Point2{-0.23, 0.29};
        auto r = reduce_branches(map.parts[0].graph, locate(dm, s), locate(dm, e));
        REQUIRE(r.code);
        const auto o = oracle_dijkstra(offset_raster(dm, gm.grid), s, e);
        CHECK(*r.code == reduce(gamma(dm, o.path)));
    }
}

TEST_CASE("pruning never removes a cell of the global optimum") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto gm = gen_archetype("maze-loops", 100, 0, seed);
        auto map = test::cdt_map(gm.grid);
        const int part = map.component_of(gm.start);
        REQUIRE(part >= 0);
        const auto& dm = map.parts[part].dm;
        const Point2 s = gm.start + Point2{0.31, 0.17}, e = gm.goal + Point2{-0.23, 0.29};
        auto r = reduce_branches(map.parts[part].graph, locate(dm, s), locate(dm, e));
        CHECK(r.graph.active_node_count() < map.parts[part].graph.node_count());
        const auto o = oracle_dijkstra(offset_raster(dm, gm.grid), s, e);
        const CdtCode opt = reduce(gamma(dm, o.path));
        for (int n : opt.nodes()) CHECK(r.graph.active(n));
        if (r.code) CHECK(*r.code == reduce(gamma(dm, o.path)));
    }
}

TEST_CASE("sampler weights") {
    auto ring = test::ring_map();
    const auto& dm = ring.dm;
    const int n = int(dm.cutlines.size());
    REQUIRE(n >= 3);

    CutlineSampler s(dm, {.alpha = 1e9, .beta = 1.0});
    for (auto& m : s.stats().mu) m = 1;
    s.invalidate();
    for (int i = 0; i < n; ++i) CHECK(s.probability(i) == doctest::Approx(1.0 / n));
    // beta = 1 ignores kappa
    for (int i = 0; i < n; ++i) s.stats().kappa[i] = i * 3;
    s.invalidate();
    for (int i = 0; i < n; ++i) CHECK(s.probability(i) == doctest::Approx(1.0 / n));

    // one unsampled cutline dominates
    for (int i = 1; i < n; ++i) s.stats().eta[i] = 5;
    s.invalidate();
    CHECK(s.probability(0) > 0.999);

    // beta < 1 scales by beta^kappa
    CutlineSampler b(dm, {.alpha = 1e9, .beta = 0.2});
    for (auto& m : b.stats().mu) m = 1;
    b.stats().kappa[1] = 2;
    b.invalidate();
    CHECK(b.probability(1) / b.probability(0) == doctest::Approx(0.04));

    // gate: cutlines with no adjacent nodes are never drawn
    CutlineSampler g(dm, {});
    g.stats().mu[2] = 1;
    g.invalidate();
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        auto [id, p] = g.sample(rng);
        CHECK(id == 2);
        CHECK(point_segment_distance(p, dm.cutlines[2].a, dm.cutlines[2].b) < 1e-9);
    }
    CutlineSampler z(dm, {});
    CHECK_THROWS_AS(z.sample(rng), InternalError);
}

TEST_CASE("sampler frequencies follow the weights") {
    auto ring = test::ring_map();
    const auto& dm = ring.dm;
    const int n = int(dm.cutlines.size());
    CutlineSampler s(dm, {.alpha = 1e9, .beta = 0.5});
    for (int i = 0; i < n; ++i) {
        s.stats().mu[i] = 1;
        s.stats().eta[i] = 1;
        s.stats().kappa[i] = i % 3;
    }
    s.invalidate();
    std::vector<int> hits(n, 0);
    std::mt19937_64 rng(77);
    const int draws = 40000;
    for (int k = 0; k < draws; ++k) ++hits[s.sample(rng).first];
    double total = 0;
    for (int i = 0; i < n; ++i) total += std::pow(0.5, i % 3);
    for (int i = 0; i < n; ++i) {
        const double p = std::pow(0.5, i % 3) / total;
        const double sd = std::sqrt(draws * p * (1 - p));
        CHECK(std::abs(hits[i] - draws * p) < 5 * sd);
    }
}

TEST_CASE("tree helpers on a hand-built tree") {
    auto l = test::component_from_polygon(test::plain_polygon(test::l_hexagon()));
    const auto& dm = l.dm;
    const Point2 root{0.2, 1.8};
    const int root_cell = locate(dm, root);
    PlanTree t(dm, root, root_cell);
    CHECK(find_nodes_near(t, dm, 0) == std::vector<int>{0});

    const auto& c = dm.cutlines[0];
    const int n1 = t.add(dm, c.at(0.9), 0, 0);
    const int n2 = t.add(dm, c.at(0.5), 0, n1);
    CHECK(find_nodes_near(t, dm, 0) == std::vector<int>{0, n1, n2});
    CHECK(find_closest(t, c.at(0.4), {n1}) == n1);
    CHECK(t.nodes[n2].cost == doctest::Approx(distance(root, c.at(0.9)) + distance(c.at(0.9), c.at(0.5))));

    // nothing better available: no change
    std::vector<int> q{n2};
    CHECK(rewire(q, t).empty());

    // a shortcut through a new node closer to the root
    const double before = t.nodes[n2].cost;
    const int n3 = t.add(dm, c.at(0.6), 0, 0);
    q = {n3};
    const auto changed = rewire(q, t);
    CHECK(t.nodes[n2].parent == n3);
    CHECK(std::count(changed.begin(), changed.end(), n2) == 1);
    CHECK(t.nodes[n2].cost < before);
    check_tree(t, dm);

    CHECK(backtrack_code(t, dm, 0, root_cell).nodes() == std::vector<int>{root_cell});
    const int other = c.other(root_cell);
    CHECK(backtrack_code(t, dm, n2, other).nodes() == std::vector<int>{root_cell, other});
    CHECK(near_goal(dm, 0, other));
}

TEST_CASE("find_closest picks the cheaper total") {
    auto ring = test::ring_map();
    PlanTree t(ring.dm, {1, 3}, locate(ring.dm, {1, 3}));
    t.nodes.push_back({.point = {4, 0}, .cost = 3});
    t.nodes.push_back({.point = {0, 3}, .cost = 2});
    CHECK(find_closest(t, {3, 0}, {1, 2}) == 1);
    CHECK(find_closest(t, {3, 0}, {2}) == 2);
    // tie goes to the lower id
    t.nodes.push_back({.point = {4, 0}, .cost = 3});
    CHECK(find_closest(t, {3, 0}, {3, 1}) == 1);
}

TEST_CASE("near_goal") {
    auto gm = gen_cluttered({.width = 100, .height = 100, .obstacles = 5, .seed = 2});
    auto map = test::cdt_map(gm.grid);
    const auto& dm = map.parts[0].dm;
    const int goal = locate(dm, gm.goal);
    int far_seen = 0;
    for (const auto& c : dm.cutlines) {
        const bool touches = c.left_poly == goal || c.right_poly == goal;
        CHECK(near_goal(dm, c.id, goal) == touches);
        if (touches) {
            // the straight leg to the goal stays in the goal cell
            for (double s : {0.1, 0.5, 0.9})
                for (double u : {0.0, 0.5, 1.0})
                    CHECK(point_in_convex(dm.cells[goal].vertices, lerp(c.at(s), gm.goal, u), 1e-7) !=
                          Containment::exterior);
        } else {
            ++far_seen;
        }
    }
    CHECK(far_seen > 0);
}

TEST_CASE("plan: trivial and reduced cases") {
    auto ring = test::ring_map();
    Task same{.x_init = {1, 3}, .x_goal = {2, 5}, .iterations = 100, .seed = 1};
    auto r = plan(same, ring.dm, ring.graph);
    REQUIRE(r.success);
    CHECK(r.termination == Termination::same_cell);
    CHECK(r.iterations_used == 0);
    CHECK(r.best_length == doctest::Approx(distance(same.x_init, same.x_goal)));

    auto l = test::component_from_polygon(test::plain_polygon(test::l_hexagon()));
    Task corridor{.x_init = {0.5, 1.9}, .x_goal = {1.9, 0.5}, .iterations = 100, .seed = 1};
    r = plan(corridor, l.dm, l.graph);
    REQUIRE(r.success);
    CHECK(r.termination == Termination::reduced);
    CHECK(r.iterations_used == 0);
    CHECK(r.best_length == doctest::Approx(distance({0.5, 1.9}, {1, 1}) + distance({1, 1}, {1.9, 0.5})));
}

TEST_CASE("plan: ring map finds both classes") {
    auto ring = test::ring_map();
    const auto left = reduce(gamma(ring.dm, Polyline{kRingStart, {1, 29}, kRingGoal}));
    const auto right = reduce(gamma(ring.dm, Polyline{kRingStart, {29, 1}, kRingGoal}));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Task task{.x_init = kRingStart, .x_goal = kRingGoal, .iterations = 500, .seed = seed};
        PlannerOptions opts;
        opts.debug_checks = true;
        auto r = plan(task, ring.dm, ring.graph, opts);
        REQUIRE(r.success);
        CHECK(r.tree_invariant_violations == 0);
        std::map<std::vector<int>, double> found;
        for (const auto& c : r.classes) found[c.code.nodes()] = c.length;
        REQUIRE(found.count(left.nodes()));
        REQUIRE(found.count(right.nodes()));
        CHECK(found[left.nodes()] == doctest::Approx(kRingLeft).epsilon(1e-6));
        CHECK(found[right.nodes()] == doctest::Approx(kRingRight).epsilon(1e-6));
        CHECK(r.best_length == doctest::Approx(std::min(kRingLeft, kRingRight)).epsilon(1e-6));
    }
}

TEST_CASE("plan invariants on generated maps") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto gm = gen_cluttered({.width = 120, .height = 120, .obstacles = 6, .seed = seed});
        auto map = test::cdt_map(gm.grid);
        Task task{.x_init = gm.start, .x_goal = gm.goal, .iterations = 600, .seed = seed};
        PlannerOptions opts;
        opts.debug_checks = true;
        opts.keep_tree = true;
        auto r = plan(task, map, opts);
        REQUIRE(r.success);
        CHECK(r.tree_invariant_violations == 0);
        CHECK_FALSE(has_duplicates(r.best_code.nodes()));
        CHECK(is_no_rollback(r.best_code.nodes()));
        for (std::size_t i = 1; i < r.improvements.size(); ++i) {
            CHECK(r.improvements[i].length < r.improvements[i - 1].length);
            CHECK(r.improvements[i].iteration >= r.improvements[i - 1].iteration);
        }
        CHECK(r.best_length == doctest::Approx(r.improvements.back().length));
        REQUIRE(r.t_init_us);
        CHECK(*r.t_init_us == r.improvements.front().time_us);
        const auto& dm = map.parts[map.component_of(gm.start)].dm;
        CHECK(reduce(gamma(dm, r.best_path)) == r.best_code);

        double best_class = 1e300;
        for (const auto& c : r.classes) best_class = std::min(best_class, c.length);
        CHECK(r.best_length == doctest::Approx(best_class));

        REQUIRE(r.tree);
        check_tree(*r.tree, dm);
        // neighbourhood and closest-node queries against linear scans
        std::mt19937_64 rng(seed);
        for (int k = 0; k < 30; ++k) {
            const int cut = int(rng() % dm.cutlines.size());
            const auto& c = dm.cutlines[cut];
            std::vector<int> brute;
            for (std::size_t i = 0; i < r.tree->nodes.size(); ++i) {
                const auto& nd = r.tree->nodes[i];
                for (int cell : {c.left_poly, c.right_poly})
                    if (nd.cell_a == cell || nd.cell_b == cell) {
                        brute.push_back(int(i));
                        break;
                    }
            }
            CHECK(find_nodes_near(*r.tree, dm, cut) == brute);
            if (brute.empty()) continue;
            const Point2 x = c.at(0.37);
            int best = -1;
            double bc = 1e300;
            for (int id : brute) {
                const double v = r.tree->nodes[id].cost + distance(r.tree->nodes[id].point, x);
                if (v < bc) bc = v, best = id;
            }
            CHECK(find_closest(*r.tree, x, brute) == best);
        }
    }
}

TEST_CASE("plan is deterministic for a fixed seed") {
    auto gm = gen_floorplan({.seed = 3});
    auto map = test::cdt_map(gm.grid);
    Task task{.x_init = gm.start, .x_goal = gm.goal, .iterations = 800, .seed = 42};
    auto a = plan(task, map), b = plan(task, map);
    CHECK(a.best_length == b.best_length);
    CHECK(a.best_code == b.best_code);
    CHECK(a.classes.size() == b.classes.size());
    REQUIRE(a.improvements.size() == b.improvements.size());
    for (std::size_t i = 0; i < a.improvements.size(); ++i)
        CHECK(a.improvements[i].iteration == b.improvements[i].iteration);
}

TEST_CASE("plan: unreachable and invalid endpoints") {
    auto g = make_grid(40, 20);
    test::block(g, 19, 0, 21, 20);
    auto map = test::cdt_map(g);
    REQUIRE(map.parts.size() == 2);
    CHECK_THROWS_AS(plan(Task{.x_init = {2, 10}, .x_goal = {38, 10}, .iterations = 10}, map), Unreachable);
    CHECK_THROWS_AS(plan(Task{.x_init = {20, 10}, .x_goal = {38, 10}, .iterations = 10}, map), NotInFreeSpace);
}

TEST_CASE("variants") {
    CHECK(parse_variant("cdt-undecoupled") == Variant::undecoupled);
    CHECK_FALSE(parse_variant("bogus"));
    auto ring = test::ring_map();
    Task task{.x_init = kRingStart, .x_goal = kRingGoal, .iterations = 400, .seed = 5};
    PlannerOptions opts;
    opts.variant = Variant::undecoupled;
    auto r = plan(task, ring.dm, ring.graph, opts);
    REQUIRE(r.success);
    // raw tree paths are never shorter than the class optimum
    CHECK(r.best_length >= std::min(kRingLeft, kRingRight) - 1e-9);
    opts.variant = Variant::noprune;
    CHECK(plan(task, ring.dm, ring.graph, opts).success);
    opts.variant = Variant::cdt;
    opts.stop_length = 1e9;
    r = plan(task, ring.dm, ring.graph, opts);
    CHECK(r.termination == Termination::target);
}
