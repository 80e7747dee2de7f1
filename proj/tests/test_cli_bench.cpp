#include <algorithm>
#include <cmath>
#include <filesystem>
#include <queue>
#include <random>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "cdt/bench.hpp"
#include "cdt/errors.hpp"
#include "cdt/io.hpp"
#include "cdt/mapgen.hpp"
#include "cdt/oracles.hpp"
#include "cdt/rrt_star.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cdt;
namespace fs = std::filesystem;

namespace {

struct Geo {
    MapGeometry geometry;
    CdtMap map;
};

Geo geo_of(const OccupancyGrid& g, double eps = 1.0) {
    Geo out;
    out.geometry = ingest(g, {.epsilon_fit = eps});
    out.map = build_map(out.geometry);
    return out;
}

ComponentGeometry ring_geometry() {
    ComponentGeometry c;
    c.outer = test::square(0, 0, 30);
    c.holes = {{{10, 10}, {10, 20}, {20, 20}, {20, 10}}};
    c.polygon = test::polygon_with_holes(c.outer, c.holes);
    return c;
}

fs::path scratch_dir() {
    auto d = fs::temp_directory_path() / ("cdt_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("generators are deterministic and well formed") {
    for (const auto& kind : archetype_names()) {
        auto a = gen_archetype(kind, 120, 6, 3), b = gen_archetype(kind, 120, 6, 3);
        CHECK(a.grid.cells == b.grid.cells);
        CHECK(a.start == b.start);
        auto geo = geo_of(a.grid);
        const int part = geo.map.component_of(a.start);
        REQUIRE(part >= 0);
        CHECK(geo.map.component_of(a.goal) == part);
    }
    CHECK_THROWS_AS(gen_archetype("volcano", 100, 1, 1), InvalidInput);
    CHECK(archetype_names().size() == 5);
}

TEST_CASE("maze without loops is simply connected") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto gm = gen_maze({.cols = 8, .rows = 8, .seed = seed});
        auto geo = geo_of(gm.grid);
        REQUIRE(geo.map.parts.size() == 1);
        const auto& g = geo.map.parts[0].graph;
        CHECK(g.node_count() - int(g.edges().size()) == 1);
        CHECK(geo.geometry.components[0].holes.empty());
    }
    auto loops = gen_maze({.cols = 8, .rows = 8, .loops = 6, .seed = 1});
    CHECK(loops.kind == "maze-loops");
    auto geo = geo_of(loops.grid);
    const auto& g = geo.map.parts[0].graph;
    CHECK(g.node_count() - int(g.edges().size()) < 1);
}

TEST_CASE("cluttered obstacle count shows up as holes") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto gm = gen_cluttered({.width = 200, .height = 200, .obstacles = 12, .seed = seed});
        auto geo = geo_of(gm.grid);
        REQUIRE(geo.geometry.components.size() == 1);
        CHECK(int(geo.geometry.components[0].holes.size()) == gm.obstacles);
        CHECK(gm.obstacles == 12);
    }
}

TEST_CASE("trap: the exit cutline is one among many under plain sampling") {
    auto gm = gen_trap({.lanes = 20, .seed = 1});
    auto geo = geo_of(gm.grid);
    const auto& part = geo.map.parts[geo.map.component_of(gm.start)];
    // once every field cutline has been sampled, plain weights give each
    // open cutline the same share
    CutlineSampler s(part.dm, {.alpha = 0.0, .beta = 1.0});
    int open = 0;
    for (std::size_t i = 0; i < part.dm.cutlines.size(); ++i)
        if (i % 2 == 0) {
            s.stats().mu[i] = 1;
            ++open;
        }
    s.invalidate();
    CHECK(s.probability(0) == doctest::Approx(1.0 / open));
    CHECK(part.dm.cutlines.size() > 100);
}

TEST_CASE("oracle_dijkstra") {
    auto empty = make_grid(10, 10);
    auto o = oracle_dijkstra(raster_from_grid(empty), {0.5, 0.5}, {9.5, 9.5});
    CHECK(o.length == doctest::Approx(9 * std::sqrt(2.0)));
    CHECK(o.path.front() == Point2{0.5, 0.5});
    CHECK(o.path.back() == Point2{9.5, 9.5});

    // wall at column 5 with a gap in the top row
    auto wall = make_grid(10, 10);
    test::block(wall, 5, 1, 6, 10);
    o = oracle_dijkstra(raster_from_grid(wall), {0.5, 0.5}, {9.5, 0.5});
    // up to (4.5,9.5): 4 diagonal + 5 straight; through the gap: 2 straight
    // (no corner cutting); down to the goal: 3 diagonal + 6 straight
    CHECK(o.length == doctest::Approx(7 * std::sqrt(2.0) + 13));
    CHECK_THROWS_AS(oracle_dijkstra(raster_from_grid(wall), {5.5, 5.5}, {9.5, 0.5}), NotInFreeSpace);

    auto split = make_grid(10, 10);
    test::block(split, 5, 0, 6, 10);
    CHECK_THROWS_AS(oracle_dijkstra(raster_from_grid(split), {0.5, 0.5}, {9.5, 0.5}), Unreachable);
}

TEST_CASE("oracle paths have duplicate-free codes") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto gm = gen_cluttered({.width = 100, .height = 100, .obstacles = 5, .seed = seed});
        auto geo = geo_of(gm.grid);
        const auto& dm = geo.map.parts[0].dm;
        const auto raster = raster_from_dissection(dm, 201, 201);
        const Point2 s = gm.start + Point2{0.31, 0.17}, e = gm.goal + Point2{-0.23, 0.29};
        auto o = oracle_dijkstra(raster, s, e);
        CHECK_FALSE(has_duplicates(reduce(gamma(dm, o.path)).nodes()));
    }
}

TEST_CASE("hsignature basics") {
    const std::vector<Point2> reps{{15, 15}};
    const Polyline left{{1, 3}, {1, 29}, {29, 27}}, right{{1, 3}, {29, 1}, {29, 27}};
    CHECK(hsignature(left, reps) != hsignature(right, reps));
    CHECK(hsignature(Polyline{{10, 25}, {20, 25}, {10, 26}}, reps).empty());
    CHECK(hsignature(Polyline{{10, 25}, {20, 25}}, reps) == std::vector<int>{1});
    CHECK(hsignature(Polyline{{20, 25}, {10, 25}}, reps) == std::vector<int>{-1});
    // a vertex exactly on the ray is handled by nudging
    CHECK(hsignature(Polyline{{10, 25}, {15, 25}, {20, 25}}, reps) == std::vector<int>{1});

    auto ring = ring_geometry();
    auto r = obstacle_representatives(ring);
    REQUIRE(r.size() == 1);
    CHECK(point_in_polygon(ring.holes[0], r[0]));
    const std::vector<Point2> l = test::l_hexagon();
    CHECK(point_in_polygon(l, interior_point(l)));
}

TEST_CASE("signature_rays avoid other holes") {
    // a small hole right below a wide one: no upward ray from it is clear
    ComponentGeometry c;
    c.outer = test::square(0, 0, 40);
    c.holes = {test::square(18, 8, 4), {{5, 20}, {35, 20}, {35, 24}, {5, 24}}};
    c.polygon = test::polygon_with_holes(c.outer, c.holes);
    const auto rays = signature_rays(c);
    REQUIRE(rays.anchors.size() == 2);
    CHECK(std::abs(rays.direction.x) > 0.5);
    for (std::size_t i = 0; i < 2; ++i) CHECK(point_in_polygon(c.holes[i], rays.anchors[i]));

    // a loop around the small hole only; the wide one is crossed by the naive ray
    const Polyline around{{16, 6}, {24, 6}, {24, 14}, {16, 14}, {16, 6}};
    const Polyline still{{16, 6}, {16, 6}};
    CHECK(hsignature(around, rays) != hsignature(still, rays));
    // going round the wide hole and back is trivial
    const Polyline there_and_back{{2, 2}, {2, 30}, {38, 30}, {2, 30}, {2, 2}};
    CHECK(hsignature(there_and_back, rays).empty());

    // ring: the upward ray is already clear
    auto ring = ring_geometry();
    CHECK(signature_rays(ring).direction == Point2{0.0, 1.0});
}

TEST_CASE("homotopic agrees with the h-signature oracle") {
    std::mt19937_64 rng(101);
    int pairs = 0, disagree = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto gm = gen_cluttered({.width = 100, .height = 100, .obstacles = 1 + int(seed % 5), .seed = seed});
        auto geo = geo_of(gm.grid);
        const auto& comp = geo.geometry.components[0];
        const auto& dm = geo.map.parts[0].dm;
        const auto& g = geo.map.parts[0].graph;
        const auto rays = signature_rays(comp);
        for (int k = 0; k < 200; ++k) {
            const int a = test::random_cell(dm, rng), b = test::random_cell(dm, rng);
            const Point2 ps = test::random_point_in_cell(dm.cells[a], rng);
            const Point2 pe = test::random_point_in_cell(dm.cells[b], rng);
            const Polyline f1 = test::random_route(dm, g, a, b, ps, pe, rng);
            const Polyline f2 = test::random_route(dm, g, a, b, ps, pe, rng);
            const bool same = homotopic(reduce(gamma(dm, f1)), reduce(gamma(dm, f2)));
            const bool oracle = hsignature(f1, rays) == hsignature(f2, rays);
            ++pairs;
            if (same != oracle) ++disagree;
        }
    }
    CHECK(disagree == 0);
    MESSAGE(pairs << " pairs");
}

TEST_CASE("FreeSpace queries") {
    FreeSpace fs_ring(ring_geometry());
    CHECK(fs_ring.contains({5, 5}));
    CHECK_FALSE(fs_ring.contains({15, 15}));
    CHECK_FALSE(fs_ring.contains({-1, 5}));
    CHECK(fs_ring.segment_free({1, 1}, {29, 1}));
    CHECK_FALSE(fs_ring.segment_free({1, 1}, {29, 29}));
    CHECK(fs_ring.segment_free({5, 5}, {10, 5}));
    CHECK(fs_ring.area() == doctest::Approx(800.0));

    // random segments against dense point sampling
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 29.9);
    for (int k = 0; k < 500; ++k) {
        const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
        if (!fs_ring.contains(a) || !fs_ring.contains(b)) continue;
        bool dense = true;
        for (int s = 0; s <= 2000 && dense; ++s) dense = fs_ring.contains(lerp(a, b, s / 2000.0));
        CHECK(fs_ring.segment_free(a, b) == dense);
    }
}

TEST_CASE("RRT* converges on a small map") {
    FreeSpace space(ring_geometry());
    const Point2 s{1, 3}, e{29, 27};
    const double opt = std::min(distance(s, {10, 20}) + distance({10, 20}, e), distance(s, {20, 10}) + distance({20, 10}, e));
    auto grid = make_grid(30, 30);
    test::block(grid, 10, 10, 20, 20);
    const auto o = oracle_dijkstra(raster_from_grid(grid), s, e);
    auto r = rrt_star(space, s, e, {.iterations = 20000, .seed = 3});
    REQUIRE(r.success);
    CHECK(r.best_length >= opt - 1e-9);
    CHECK(r.best_length <= 1.02 * o.length);
    REQUIRE(r.t_init_us);
    for (std::size_t i = 0; i + 1 < r.best_path.size(); ++i) CHECK(space.segment_free(r.best_path[i], r.best_path[i + 1]));
    for (std::size_t i = 1; i < r.improvements.size(); ++i) CHECK(r.improvements[i].length < r.improvements[i - 1].length);

    auto again = rrt_star(space, s, e, {.iterations = 20000, .seed = 3});
    CHECK(again.best_length == r.best_length);
    auto stop = rrt_star(space, s, e, {.iterations = 20000, .stop_length = 1e9, .seed = 3});
    CHECK(stop.iterations_used < 20000);
}

TEST_CASE("artifact JSON round trip") {
    auto gm = gen_cluttered({.width = 80, .height = 60, .obstacles = 3, .seed = 4});
    auto a = build_artifact(gm.grid, {.epsilon_fit = 2.0});
    CHECK(a.stats.holes == 3);
    CHECK(a.stats.cells == int(a.map.parts[0].dm.cells.size()));
    auto j = artifact_to_json(a);
    auto b = artifact_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(b.map.parts.size() == a.map.parts.size());
    const auto &da = a.map.parts[0].dm, &db = b.map.parts[0].dm;
    REQUIRE(da.cells.size() == db.cells.size());
    REQUIRE(da.cutlines.size() == db.cutlines.size());
    for (std::size_t i = 0; i < da.cells.size(); ++i) CHECK(da.cells[i].vertices == db.cells[i].vertices);
    for (std::size_t i = 0; i < da.cutlines.size(); ++i) {
        CHECK(da.cutlines[i].a == db.cutlines[i].a);
        CHECK(da.cutlines[i].left_poly == db.cutlines[i].left_poly);
    }
    CHECK(b.map.parts[0].graph.edges().size() == a.map.parts[0].graph.edges().size());
    CHECK(artifact_to_json(b)["components"] == j["components"]);

    auto bad = j;
    bad["format"] = "other";
    CHECK_THROWS_AS(artifact_from_json(bad), ParseError);
    bad = j;
    bad["components"][0]["cutlines"][0]["left"] = 99999;
    CHECK_THROWS_AS(artifact_from_json(bad), ParseError);
    CHECK_THROWS_AS(artifact_from_json(nlohmann::json::array()), ParseError);
}

TEST_CASE("file helpers") {
    const auto dir = scratch_dir();
    auto gm = gen_floorplan({.seed = 1});
    write_file(dir / "m.pgm", encode_pgm(gm.grid));
    auto from_pgm = load_map_or_artifact(dir / "m.pgm", {.epsilon_fit = 1.0});
    write_file(dir / "m.json", artifact_to_json(from_pgm).dump());
    auto from_json = load_map_or_artifact(dir / "m.json", {.epsilon_fit = 1.0});
    CHECK(from_json.stats.cells == from_pgm.stats.cells);
    CHECK_THROWS_AS(read_file(dir / "missing.pgm"), IoError);
    CHECK_THROWS_AS(load_map_or_artifact(dir / "missing.pgm", {}), IoError);
    fs::remove_all(dir);

    CHECK(parse_point("3.5, -2") == Point2{3.5, -2});
    CHECK_THROWS_AS(parse_point("3.5"), ParseError);
    CHECK(parse_polyline("[[0,0],[1,2]]") == Polyline{{0, 0}, {1, 2}});
    CHECK(parse_polyline("# path\n0 0\n1,2\n") == Polyline{{0, 0}, {1, 2}});
    CHECK_THROWS_AS(parse_polyline("0 0\nx y\n"), ParseError);
}

TEST_CASE("plan JSON and SVG") {
    auto ring = test::ring_map();
    MapArtifact a;
    a.geometry.width = 30;
    a.geometry.height = 30;
    a.geometry.components.push_back(ring_geometry());
    a.map.parts.push_back(ring);
    Task task{.x_init = {1, 3}, .x_goal = {29, 27}, .iterations = 400, .seed = 2};
    PlannerOptions opts;
    auto r = plan(task, a.map, opts);
    auto j = plan_to_json(task, opts, r, false);
    CHECK(j["result"]["success"] == true);
    CHECK(j["result"]["length"].get<double>() == doctest::Approx(r.best_length));
    CHECK_FALSE(j["result"].contains("t_init_us"));
    int best = 0;
    for (const auto& c : j["result"]["classes"]) best += c["best"].get<bool>();
    CHECK(best == 1);
    CHECK(plan_to_json(task, opts, plan(task, a.map, opts), false).dump() == j.dump());
    CHECK(plan_to_json(task, opts, r, true)["result"].contains("t_init_us"));

    SvgLayers layers{&task, &r};
    const auto svg = render_svg(a, layers);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("statistics helpers") {
    CHECK(sign_test_p(10, 10) == doctest::Approx(1.0 / 1024));
    CHECK(sign_test_p(0, 10) == doctest::Approx(1.0));
    CHECK(sign_test_p(5, 10) == doctest::Approx(638.0 / 1024));
    CHECK(median_or_inf({1.0, 3.0, std::nullopt}) == 3.0);
    CHECK(std::isinf(median_or_inf({1.0, std::nullopt, std::nullopt})));
    CHECK(median_or_inf({1.0, 2.0, 3.0, 4.0}) == 2.5);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> a, b;
    for (int i = 0; i < 400; ++i) {
        a.push_back(n(rng));
        b.push_back(n(rng) + 1.0);
    }
    auto ci = bootstrap_mean_diff(a, b, 2000, 0.95, 1);
    CHECK(ci.lo < -1.0 + 0.3);
    CHECK(ci.hi > -1.0 - 0.3);
    CHECK(ci.hi < 0.0);
}

TEST_CASE("bench spec validation and JSON") {
    BenchSpec s;
    CHECK_NOTHROW(validate(s));
    s.repetitions = 0;
    CHECK_THROWS_AS(validate(s), InvalidInput);
    s = {};
    s.betas = {0.0};
    CHECK_THROWS_AS(validate(s), InvalidInput);
    s = {};
    s.planners = {"dijkstra"};
    CHECK_THROWS_AS(validate(s), InvalidInput);

    s = {};
    s.tasks = {{{1, 2}, {3, 4}}};
    s.betas = {0.2, 1.0};
    s.stop = StopRule::first;
    auto back = bench_spec_from_json(bench_spec_to_json(s));
    CHECK(bench_spec_to_json(back) == bench_spec_to_json(s));
    CHECK(back.stop == StopRule::first);
    CHECK(back.tasks.size() == 1);
}

TEST_CASE("bench run bookkeeping") {
    BenchSpec s;
    s.kind = "cluttered";
    s.size = 100;
    s.obstacles = 4;
    s.map_seed = 2;
    s.planners = {"cdt", "cdt-undecoupled", "rrt-star"};
    s.repetitions = 3;
    s.iterations = 800;
    s.rrt_iterations = 3000;
    s.stop = StopRule::none;
    auto rep = run_bench(s);
    REQUIRE(rep.oracles.size() == 1);
    const auto& o = rep.oracles[0];
    CHECK(o.c_optimal <= o.dijkstra);
    CHECK(rep.runs.size() == 9);
    for (const auto& r : rep.runs) {
        if (!r.success) continue;
        CHECK(o.c_optimal <= r.length + 1e-9);
        CHECK(r.t_2pct_us.has_value() == (r.length <= 1.02 * o.c_optimal));
        CHECK(r.budget_exceeded == !r.t_2pct_us.has_value());
        if (r.t_2pct_us) CHECK(*r.t_init_us <= *r.t_2pct_us);
    }
    CHECK(rep.summary.size() == 3);

    const auto csv = summary_to_csv(rep);
    CHECK(csv.rfind("task,planner,beta,runs,successes,", 0) == 0);
    std::istringstream lines(runs_to_csv(rep));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 10);

    // same spec, same lengths
    auto rep2 = run_bench(s);
    for (std::size_t i = 0; i < rep.runs.size(); ++i) CHECK(rep.runs[i].length == rep2.runs[i].length);
    CHECK(report_to_json(rep)["runs"].size() == 9);
}
