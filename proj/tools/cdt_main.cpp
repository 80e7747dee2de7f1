// Command-line front end: init, plan, encode, bench, genmaps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cdt/bench.hpp"
#include "cdt/errors.hpp"
#include "cdt/io.hpp"
#include "cdt/mapgen.hpp"
#include "cdt/planner.hpp"
#include "cdt/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUnreachable = 2, kIo = 3, kInvalid = 4 };

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        cdt::write_file(out, text);
}

std::string csv_line(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) s += ',';
        first = false;
        if (c.find_first_of(",\"\n") == std::string::npos) {
            s += c;
            continue;
        }
        s += '"';
        for (char ch : c) s += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        s += '"';
    }
    return s + '\n';
}

// --- init ------------------------------------------------------------------

struct InitArgs {
    std::string map, out, svg, format = "json";
    double epsilon = cdt::IngestConfig{}.epsilon_fit;
};

int cmd_init(const InitArgs& a) {
    const cdt::IngestConfig cfg{a.epsilon, 128};
    const auto bytes = cdt::read_file(a.map);
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
    const cdt::MapArtifact art = cdt::build_artifact(cdt::load_grid({p, bytes.size()}, cfg.occ_threshold), cfg);
    if (!a.out.empty()) cdt::write_file(a.out, cdt::artifact_to_json(art).dump() + "\n");
    if (!a.svg.empty()) cdt::write_file(a.svg, cdt::render_svg(art));
    const cdt::InitStats& s = art.stats;
    if (a.format == "csv") {
        std::cout << "map,width,height,components,holes,vertices,reflex,cells,cutlines,elapsed_us\n"
                  << csv_line({a.map, std::to_string(art.geometry.width), std::to_string(art.geometry.height),
                               std::to_string(s.components), std::to_string(s.holes), std::to_string(s.vertices),
                               std::to_string(s.reflex), std::to_string(s.cells), std::to_string(s.cutlines),
                               std::to_string(s.elapsed_us)});
    } else {
        std::cout << json{{"map", a.map},
                          {"width", art.geometry.width},
                          {"height", art.geometry.height},
                          {"components", s.components},
                          {"holes", s.holes},
                          {"vertices", s.vertices},
                          {"reflex", s.reflex},
                          {"cells", s.cells},
                          {"cutlines", s.cutlines},
                          {"elapsed_us", s.elapsed_us}}
                         .dump(2)
                  << "\n";
    }
    return kOk;
}

// --- plan ------------------------------------------------------------------

struct PlanArgs {
    std::string map, start, goal, svg, out, variant = "cdt", format = "json";
    double epsilon = cdt::IngestConfig{}.epsilon_fit;
    double alpha = cdt::SamplerParams{}.alpha;
    double beta = cdt::SamplerParams{}.beta;
    int iterations = 1000;
    std::uint64_t seed = 1;
    bool timings = false;
    bool tree = false;
};

int cmd_plan(const PlanArgs& a) {
    const cdt::MapArtifact art = cdt::load_map_or_artifact(a.map, {a.epsilon, 128});
    cdt::Task task{cdt::parse_point(a.start), cdt::parse_point(a.goal), a.iterations, a.seed};
    cdt::PlannerOptions opts;
    const auto variant = cdt::parse_variant(a.variant);
    if (!variant) throw cdt::InvalidInput("unknown variant " + a.variant);
    opts.variant = *variant;
    opts.sampler = {a.alpha, a.beta};
    opts.keep_tree = a.tree && !a.svg.empty();
    const cdt::PlanResult r = cdt::plan(task, art.map, opts);
    if (!a.svg.empty()) cdt::write_file(a.svg, cdt::render_svg(art, {&task, &r}));
    if (a.format == "csv") {
        std::ostringstream len;
        len.precision(17);
        len << r.best_length;
        emit("success,termination,length,code,iterations,classes\n" +
                 csv_line({r.success ? "1" : "0", cdt::termination_name(r.termination), r.success ? len.str() : "",
                           r.success ? r.best_code.to_string() : "", std::to_string(r.iterations_used),
                           std::to_string(r.classes.size())}),
             a.out);
    } else {
        emit(cdt::plan_to_json(task, opts, r, a.timings).dump(2) + "\n", a.out);
    }
    if (!r.success) {
        std::cerr << "no path found within " << a.iterations << " iterations\n";
        return kUnreachable;
    }
    return kOk;
}

// --- encode ----------------------------------------------------------------

struct EncodeArgs {
    std::string map, polyline;
    double epsilon = cdt::IngestConfig{}.epsilon_fit;
};

int cmd_encode(const EncodeArgs& a) {
    const cdt::MapArtifact art = cdt::load_map_or_artifact(a.map, {a.epsilon, 128});
    std::string text;
    if (a.polyline == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
    } else {
        text = cdt::read_file(a.polyline);
    }
    const cdt::Polyline f = cdt::parse_polyline(text);
    const int comp = art.map.component_of(f.front());
    if (comp < 0) throw cdt::NotInFreeSpace("polyline vertex 0 is not in free space", 0);
    const auto& dm = art.map.parts[static_cast<std::size_t>(comp)].dm;
    try {
        std::cout << cdt::reduce(cdt::gamma(dm, f)).to_string() << "\n";
    } catch (const cdt::NotInFreeSpace& e) {
        const auto i = e.index();
        throw cdt::NotInFreeSpace("polyline leaves free space on segment " + std::to_string(i) + " (vertex " +
                                      std::to_string(i) + " to vertex " + std::to_string(i + 1) + ")",
                                  i);
    }
    return kOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
    std::string spec, map, kind, planners, betas, stop, format = "json", out, runs_out, start, goal;
    int size = 0, obstacles = -1, reps = 0, iterations = -1, rrt_iterations = -1, threads = 0;
    double epsilon = 0.0, alpha = -1.0, budget_ms = -1.0;
    std::int64_t map_seed = -1, seed = -1;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_bench(const BenchArgs& a) {
    cdt::BenchSpec spec;
    if (!a.spec.empty()) {
        json j;
        try {
            j = json::parse(cdt::read_file(a.spec));
        } catch (const json::parse_error& e) {
            throw cdt::ParseError(a.spec + ": " + e.what());
        }
        spec = cdt::bench_spec_from_json(j);
    }
    if (!a.map.empty()) spec.map_file = a.map;
    if (!a.kind.empty()) spec.kind = a.kind;
    if (a.size > 0) spec.size = a.size;
    if (a.obstacles >= 0) spec.obstacles = a.obstacles;
    if (a.map_seed >= 0) spec.map_seed = static_cast<std::uint64_t>(a.map_seed);
    if (!a.planners.empty()) spec.planners = split_commas(a.planners);
    if (!a.betas.empty()) {
        spec.betas.clear();
        for (const auto& b : split_commas(a.betas)) {
            try {
                spec.betas.push_back(std::stod(b));
            } catch (const std::exception&) {
                throw cdt::InvalidInput("bad beta value " + b);
            }
        }
    }
    if (a.reps > 0) spec.repetitions = a.reps;
    if (a.iterations >= 0) spec.iterations = a.iterations;
    if (a.rrt_iterations >= 0) spec.rrt_iterations = a.rrt_iterations;
    if (a.threads > 0) spec.threads = a.threads;
    if (a.epsilon > 0.0) spec.epsilon_fit = a.epsilon;
    if (a.alpha >= 0.0) spec.alpha = a.alpha;
    if (a.budget_ms >= 0.0) spec.time_budget_ms = a.budget_ms;
    if (a.seed >= 0) spec.seed = static_cast<std::uint64_t>(a.seed);
    if (a.stop == "none") spec.stop = cdt::StopRule::none;
    if (a.stop == "first") spec.stop = cdt::StopRule::first;
    if (a.stop == "target") spec.stop = cdt::StopRule::target;
    if (!a.start.empty() || !a.goal.empty()) {
        if (a.start.empty() || a.goal.empty()) throw cdt::InvalidInput("--start and --goal go together");
        spec.tasks = {{cdt::parse_point(a.start), cdt::parse_point(a.goal)}};
    }
    const cdt::BenchReport rep = cdt::run_bench(spec);
    if (!a.runs_out.empty()) cdt::write_file(a.runs_out, cdt::runs_to_csv(rep));
    emit(a.format == "csv" ? cdt::summary_to_csv(rep) : cdt::report_to_json(rep).dump(2) + "\n", a.out);
    return kOk;
}

// --- genmaps ---------------------------------------------------------------

struct GenArgs {
    std::string kind = "all", out = ".";
    int size = 200, obstacles = 12, count = 1;
    std::uint64_t seed = 1;
};

int cmd_genmaps(const GenArgs& a) {
    std::vector<std::string> kinds = a.kind == "all" ? cdt::archetype_names() : split_commas(a.kind);
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw cdt::IoError("cannot create " + a.out);
    json index = json::array();
    for (const auto& kind : kinds)
        for (int i = 0; i < a.count; ++i) {
            const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
            const cdt::GeneratedMap gm = cdt::gen_archetype(kind, a.size, a.obstacles, seed);
            const std::string name = kind + "_" + std::to_string(seed) + ".pgm";
            cdt::write_file(fs::path(a.out) / name, cdt::encode_pgm(gm.grid));
            index.push_back({{"file", name},
                             {"kind", kind},
                             {"seed", seed},
                             {"width", gm.grid.width},
                             {"height", gm.grid.height},
                             {"obstacles", gm.obstacles},
                             {"start", cdt::point_to_json(gm.start)},
                             {"goal", cdt::point_to_json(gm.goal)}});
        }
    cdt::write_file(fs::path(a.out) / "maps.json", index.dump(2) + "\n");
    std::cout << index.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex-dissection topology planner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cdt 1.0");

    InitArgs ia;
    auto* init = app.add_subcommand("init", "Fit polygons to a PGM map and dissect them into convex cells");
    init->add_option("--map", ia.map, "PGM occupancy map")->required();
    init->add_option("--epsilon", ia.epsilon, "Polygon fitting tolerance in map units")->check(CLI::PositiveNumber);
    init->add_option("--out", ia.out, "Write the JSON artifact here");
    init->add_option("--svg", ia.svg, "Write an SVG drawing of the dissection");
    init->add_option("--format", ia.format, "Stats format")->check(CLI::IsMember({"json", "csv"}));

    PlanArgs pa;
    auto* plan = app.add_subcommand("plan", "Plan a path between two points");
    plan->add_option("--map", pa.map, "JSON artifact or PGM map")->required();
    plan->add_option("--start", pa.start, "Start point x,y")->required();
    plan->add_option("--goal", pa.goal, "Goal point x,y")->required();
    plan->add_option("--iterations,-n", pa.iterations, "Sampling iterations")->check(CLI::NonNegativeNumber);
    plan->add_option("--seed", pa.seed, "Random seed");
    plan->add_option("--alpha", pa.alpha, "Weight of unsampled cutlines")->check(CLI::NonNegativeNumber);
    plan->add_option("--beta", pa.beta, "Penalty base for cutlines in known classes");
    plan->add_option("--variant", pa.variant, "cdt, cdt-undecoupled, cdt-noprune or cdt-noalpha");
    plan->add_option("--epsilon", pa.epsilon, "Fitting tolerance when --map is a PGM")->check(CLI::PositiveNumber);
    plan->add_option("--svg", pa.svg, "Write an SVG of the result");
    plan->add_flag("--tree", pa.tree, "Draw the search tree in the SVG");
    plan->add_option("--out", pa.out, "Write the result here instead of stdout");
    plan->add_option("--format", pa.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    plan->add_flag("--timings", pa.timings, "Include wall-clock timings in the JSON");

    EncodeArgs ea;
    auto* encode = app.add_subcommand("encode", "Print the reduced cell code of a polyline");
    encode->add_option("--map", ea.map, "JSON artifact or PGM map")->required();
    encode->add_option("--polyline", ea.polyline, "Polyline file (JSON [[x,y],...] or one point per line), - for stdin")
        ->required();
    encode->add_option("--epsilon", ea.epsilon, "Fitting tolerance when --map is a PGM")->check(CLI::PositiveNumber);

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run planner comparisons");
    bench->add_option("--spec", ba.spec, "JSON bench spec; flags below override it");
    bench->add_option("--map", ba.map, "Map file instead of a generated one");
    bench->add_option("--kind", ba.kind, "Generated map kind")->check(CLI::IsMember(cdt::archetype_names()));
    bench->add_option("--size", ba.size, "Generated map size");
    bench->add_option("--obstacles", ba.obstacles, "Generated obstacle count");
    bench->add_option("--map-seed", ba.map_seed, "Generator seed");
    bench->add_option("--planners", ba.planners, "Comma list of cdt, cdt-undecoupled, cdt-noprune, cdt-noalpha, rrt-star");
    bench->add_option("--reps", ba.reps, "Repetitions per planner");
    bench->add_option("--betas", ba.betas, "Comma list of beta values");
    bench->add_option("--alpha", ba.alpha, "Weight of unsampled cutlines");
    bench->add_option("--iterations", ba.iterations, "CDT iteration budget");
    bench->add_option("--rrt-iterations", ba.rrt_iterations, "RRT* iteration budget");
    bench->add_option("--budget-ms", ba.budget_ms, "RRT* time budget per run");
    bench->add_option("--stop", ba.stop, "none, first or target")->check(CLI::IsMember({"none", "first", "target"}));
    bench->add_option("--seed", ba.seed, "Base run seed");
    bench->add_option("--threads", ba.threads, "Worker threads");
    bench->add_option("--epsilon", ba.epsilon, "Fitting tolerance");
    bench->add_option("--start", ba.start, "Task start x,y");
    bench->add_option("--goal", ba.goal, "Task goal x,y");
    bench->add_option("--format", ba.format, "Summary format")->check(CLI::IsMember({"json", "csv"}));
    bench->add_option("--out", ba.out, "Write the summary here instead of stdout");
    bench->add_option("--runs-out", ba.runs_out, "Write per-run CSV here");

    GenArgs ga;
    auto* gen = app.add_subcommand("genmaps", "Write generated PGM maps");
    gen->add_option("--kind", ga.kind, "all, or a comma list of cluttered, trap, maze, maze-loops, floorplan");
    gen->add_option("--size", ga.size, "Map size in cells");
    gen->add_option("--obstacles", ga.obstacles, "Obstacle count (cluttered) or loops (maze-loops)");
    gen->add_option("--seed", ga.seed, "First seed");
    gen->add_option("--count", ga.count, "Maps per kind")->check(CLI::PositiveNumber);
    gen->add_option("--out", ga.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*init) return cmd_init(ia);
        if (*plan) return cmd_plan(pa);
        if (*encode) return cmd_encode(ea);
        if (*bench) return cmd_bench(ba);
        if (*gen) return cmd_genmaps(ga);
    } catch (const cdt::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const cdt::Unreachable& e) {
        std::cerr << "unreachable: " << e.what() << "\n";
        return kUnreachable;
    } catch (const cdt::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kFailure;
    } catch (const cdt::Error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
    return kFailure;
}
