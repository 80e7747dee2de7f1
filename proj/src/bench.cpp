#include "cdt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include "cdt/errors.hpp"
#include "cdt/mapgen.hpp"
#include "cdt/oracles.hpp"
#include "cdt/rrt_star.hpp"

namespace cdt {

using nlohmann::json;

namespace {

constexpr double kBand = 1.02;

bool known_planner(const std::string& p) { return p == "rrt-star" || parse_variant(p).has_value(); }

}  // namespace

const char* stop_rule_name(StopRule s) {
    switch (s) {
        case StopRule::none: return "none";
        case StopRule::first: return "first";
        case StopRule::target: return "target";
    }
    return "?";
}

void validate(const BenchSpec& spec) {
    if (spec.repetitions < 1) throw InvalidInput("bench: repetitions must be at least 1");
    if (spec.iterations < 0 || spec.rrt_iterations < 0) throw InvalidInput("bench: negative iteration budget");
    if (spec.betas.empty()) throw InvalidInput("bench: no beta values");
    for (double b : spec.betas)
        if (!(b > 0.0 && b <= 1.0)) throw InvalidInput("bench: beta values must lie in (0, 1]");
    if (spec.planners.empty()) throw InvalidInput("bench: no planners");
    for (const auto& p : spec.planners)
        if (!known_planner(p)) throw InvalidInput("bench: unknown planner " + p);
    if (spec.threads < 1) throw InvalidInput("bench: threads must be at least 1");
    if (!(spec.epsilon_fit > 0.0)) throw InvalidInput("bench: epsilon must be positive");
}

BenchSpec bench_spec_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("bench spec must be a JSON object");
    BenchSpec s;
    try {
        if (j.contains("map")) {
            const json& m = j.at("map");
            if (m.is_string()) {
                s.map_file = m.get<std::string>();
            } else {
                s.kind = m.value("kind", s.kind);
                s.size = m.value("size", s.size);
                s.obstacles = m.value("obstacles", s.obstacles);
                s.map_seed = m.value("seed", s.map_seed);
            }
        }
        s.epsilon_fit = j.value("epsilon", s.epsilon_fit);
        if (j.contains("tasks"))
            for (const json& t : j.at("tasks")) {
                const auto a = t.at("start").get<std::vector<double>>();
                const auto b = t.at("goal").get<std::vector<double>>();
                if (a.size() != 2 || b.size() != 2) throw ParseError("task points must be [x, y]");
                s.tasks.push_back({{a[0], a[1]}, {b[0], b[1]}});
            }
        if (j.contains("planners")) s.planners = j.at("planners").get<std::vector<std::string>>();
        s.repetitions = j.value("repetitions", s.repetitions);
        if (j.contains("betas")) s.betas = j.at("betas").get<std::vector<double>>();
        s.alpha = j.value("alpha", s.alpha);
        s.iterations = j.value("iterations", s.iterations);
        s.rrt_iterations = j.value("rrt_iterations", s.rrt_iterations);
        s.time_budget_ms = j.value("time_budget_ms", s.time_budget_ms);
        s.seed = j.value("seed", s.seed);
        s.threads = j.value("threads", s.threads);
        const std::string stop = j.value("stop", std::string(stop_rule_name(s.stop)));
        if (stop == "none")
            s.stop = StopRule::none;
        else if (stop == "first")
            s.stop = StopRule::first;
        else if (stop == "target")
            s.stop = StopRule::target;
        else
            throw ParseError("unknown stop rule " + stop);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bench spec: ") + e.what());
    }
    return s;
}

json bench_spec_to_json(const BenchSpec& s) {
    json tasks = json::array();
    for (const auto& t : s.tasks) tasks.push_back({{"start", point_to_json(t.start)}, {"goal", point_to_json(t.goal)}});
    json map = s.map_file.empty()
                   ? json{{"kind", s.kind}, {"size", s.size}, {"obstacles", s.obstacles}, {"seed", s.map_seed}}
                   : json(s.map_file);
    return {{"map", map},
            {"epsilon", s.epsilon_fit},
            {"tasks", tasks},
            {"planners", s.planners},
            {"repetitions", s.repetitions},
            {"betas", s.betas},
            {"alpha", s.alpha},
            {"iterations", s.iterations},
            {"rrt_iterations", s.rrt_iterations},
            {"time_budget_ms", s.time_budget_ms},
            {"stop", stop_rule_name(s.stop)},
            {"seed", s.seed},
            {"threads", s.threads}};
}

namespace {

struct Job {
    int task;
    std::string planner;
    double beta;
    int rep;
};

RunRecord run_one(const Job& job, const BenchSpec& spec, const MapArtifact& art, const TaskOracle& oracle,
                  const std::vector<std::optional<FreeSpace>>& spaces) {
    RunRecord rec;
    rec.task = job.task;
    rec.planner = job.planner;
    rec.beta = job.beta;
    rec.rep = job.rep;
    rec.seed = spec.seed + static_cast<std::uint64_t>(job.rep);
    std::optional<double> stop;
    if (spec.stop == StopRule::first) stop = std::numeric_limits<double>::infinity();
    if (spec.stop == StopRule::target) stop = kBand * oracle.reference;

    if (job.planner == "rrt-star") {
        const int comp = art.map.component_of(oracle.task.start);
        RrtStarParams p;
        p.iterations = spec.rrt_iterations > 0 ? spec.rrt_iterations : spec.iterations;
        p.time_budget_us = spec.time_budget_ms * 1000.0;
        p.stop_length = stop.value_or(0.0);
        p.seed = rec.seed;
        const RrtStarResult r = rrt_star(*spaces[static_cast<std::size_t>(comp)], oracle.task.start, oracle.task.goal, p);
        rec.success = r.success;
        rec.length = r.best_length;
        rec.t_init_us = r.t_init_us;
        rec.iterations = r.iterations_used;
        rec.elapsed_us = r.elapsed_us;
        rec.improvements = r.improvements;
        return rec;
    }
    Task task{oracle.task.start, oracle.task.goal, spec.iterations, rec.seed};
    PlannerOptions opts;
    opts.variant = *parse_variant(job.planner);
    opts.sampler.alpha = spec.alpha;
    opts.sampler.beta = job.beta;
    opts.stop_length = stop;
    const PlanResult r = plan(task, art.map, opts);
    rec.success = r.success;
    rec.length = r.best_length;
    rec.t_init_us = r.t_init_us;
    rec.iterations = r.iterations_used;
    rec.classes = static_cast<int>(r.classes.size());
    rec.cutlines_considered = r.cutlines_considered;
    rec.cutlines_total = r.cutlines_total;
    rec.elapsed_us = r.elapsed_us;
    rec.improvements = r.improvements;
    return rec;
}

std::optional<double> first_below(const std::vector<Improvement>& imps, double target) {
    for (const auto& i : imps)
        if (i.length <= target) return i.time_us;
    return std::nullopt;
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::optional<double> mean(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec) {
    validate(spec);
    const IngestConfig cfg{spec.epsilon_fit, 128};
    if (!spec.map_file.empty()) return run_bench(spec, load_map_or_artifact(spec.map_file, cfg));
    const GeneratedMap gm = gen_archetype(spec.kind, spec.size, spec.obstacles, spec.map_seed);
    BenchSpec s = spec;
    if (s.tasks.empty()) s.tasks.push_back({gm.start, gm.goal});
    return run_bench(s, build_artifact(gm.grid, cfg));
}

BenchReport run_bench(const BenchSpec& spec, const MapArtifact& art) {
    validate(spec);
    if (spec.tasks.empty()) throw InvalidInput("bench: no tasks");
    BenchReport rep;
    rep.spec = spec;
    rep.init = art.stats;

    std::vector<std::optional<FreeSpace>> spaces(art.geometry.components.size());
    for (const auto& p : spec.planners)
        if (p == "rrt-star")
            for (std::size_t k = 0; k < spaces.size(); ++k) spaces[k].emplace(art.geometry.components[k]);

    // Oracle and reference length per task.
    for (const auto& t : spec.tasks) {
        const int a = art.map.component_of(t.start);
        const int b = art.map.component_of(t.goal);
        if (a < 0 || b < 0) throw NotInFreeSpace("bench: task endpoint is not in free space");
        if (a != b) throw Unreachable("bench: task endpoints lie in different components");
        const DissectionMap& dm = art.map.parts[static_cast<std::size_t>(a)].dm;
        // Half-resolution pixels keep one-cell walls solid on the raster.
        const double pixel = 0.5 * art.geometry.resolution;
        const double w = art.geometry.width * art.geometry.resolution, h = art.geometry.height * art.geometry.resolution;
        const Raster raster = raster_from_dissection(dm, static_cast<int>(std::ceil(w / pixel)),
                                                     static_cast<int>(std::ceil(h / pixel)));
        TaskOracle o;
        o.task = t;
        o.raster_pixel = raster.pixel;
        o.dijkstra = oracle_dijkstra(raster, t.start, t.goal).length;
        o.reference = o.dijkstra;
        for (std::uint64_t k = 0; k < 3; ++k) {
            Task ref{t.start, t.goal, std::max(2 * spec.iterations, 2000), spec.seed + 1000003 + k};
            const PlanResult r = plan(ref, art.map);
            if (r.success) o.reference = std::min(o.reference, r.best_length);
        }
        rep.oracles.push_back(o);
    }

    std::vector<Job> jobs;
    for (int t = 0; t < static_cast<int>(spec.tasks.size()); ++t)
        for (const auto& p : spec.planners)
            for (double beta : (p == "rrt-star" ? std::vector<double>{0.0} : spec.betas))
                for (int r = 0; r < spec.repetitions; ++r) jobs.push_back({t, p, beta, r});
    rep.runs.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.threads, [&](int i) {
        rep.runs[static_cast<std::size_t>(i)] =
            run_one(jobs[static_cast<std::size_t>(i)], spec, art, rep.oracles[static_cast<std::size_t>(jobs[i].task)],
                    spaces);
    });

    for (auto& o : rep.oracles) o.c_optimal = std::min(o.dijkstra, o.reference);
    for (const auto& r : rep.runs)
        if (r.success) {
            auto& o = rep.oracles[static_cast<std::size_t>(r.task)];
            o.c_optimal = std::min(o.c_optimal, r.length);
        }
    for (auto& r : rep.runs) {
        r.t_2pct_us = first_below(r.improvements, kBand * rep.oracles[static_cast<std::size_t>(r.task)].c_optimal);
        r.budget_exceeded = !r.t_2pct_us.has_value();
    }

    for (int t = 0; t < static_cast<int>(spec.tasks.size()); ++t)
        for (const auto& p : spec.planners)
            for (double beta : (p == "rrt-star" ? std::vector<double>{0.0} : spec.betas)) {
                SummaryRow row;
                row.task = t;
                row.planner = p;
                row.beta = beta;
                std::vector<double> init, t2, opt, ratio, cuts, elapsed;
                const double copt = rep.oracles[static_cast<std::size_t>(t)].c_optimal;
                for (const auto& r : rep.runs) {
                    if (r.task != t || r.planner != p || r.beta != beta) continue;
                    ++row.runs;
                    if (r.success) {
                        ++row.successes;
                        ratio.push_back(r.length / copt);
                    }
                    if (r.t_init_us) init.push_back(*r.t_init_us);
                    if (r.t_2pct_us) {
                        ++row.reached;
                        t2.push_back(*r.t_2pct_us);
                        opt.push_back(*r.t_2pct_us - *r.t_init_us);
                    }
                    cuts.push_back(r.cutlines_considered);
                    elapsed.push_back(r.elapsed_us);
                }
                row.mean_t_init_us = mean(init);
                row.median_t_init_us = median(init);
                row.mean_t_2pct_us = mean(t2);
                row.median_t_2pct_us = median(t2);
                row.mean_opt_time_us = mean(opt);
                row.mean_length_ratio = mean(ratio);
                row.mean_cutlines_considered = mean(cuts).value_or(0.0);
                row.mean_elapsed_us = mean(elapsed).value_or(0.0);
                rep.summary.push_back(row);
            }
    return rep;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_num(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream s;
    s.precision(10);
    s << *v;
    return s.str();
}

}  // namespace

json report_to_json(const BenchReport& r) {
    json oracles = json::array();
    for (const auto& o : r.oracles)
        oracles.push_back({{"start", point_to_json(o.task.start)},
                           {"goal", point_to_json(o.task.goal)},
                           {"dijkstra", o.dijkstra},
                           {"raster_pixel", o.raster_pixel},
                           {"reference", o.reference},
                           {"c_optimal", o.c_optimal}});
    json summary = json::array();
    for (const auto& s : r.summary)
        summary.push_back({{"task", s.task},
                           {"planner", s.planner},
                           {"beta", s.beta},
                           {"runs", s.runs},
                           {"successes", s.successes},
                           {"success_rate", static_cast<double>(s.successes) / s.runs},
                           {"reached_2pct", s.reached},
                           {"mean_t_init_us", opt(s.mean_t_init_us)},
                           {"median_t_init_us", opt(s.median_t_init_us)},
                           {"mean_t_2pct_us", opt(s.mean_t_2pct_us)},
                           {"median_t_2pct_us", opt(s.median_t_2pct_us)},
                           {"mean_opt_time_us", opt(s.mean_opt_time_us)},
                           {"mean_length_ratio", opt(s.mean_length_ratio)},
                           {"mean_cutlines_considered", s.mean_cutlines_considered},
                           {"mean_elapsed_us", s.mean_elapsed_us}});
    json runs = json::array();
    for (const auto& x : r.runs)
        runs.push_back({{"task", x.task},
                        {"planner", x.planner},
                        {"beta", x.beta},
                        {"rep", x.rep},
                        {"seed", x.seed},
                        {"success", x.success},
                        {"length", x.success ? json(x.length) : json(nullptr)},
                        {"t_init_us", opt(x.t_init_us)},
                        {"t_2pct_us", opt(x.t_2pct_us)},
                        {"budget_exceeded", x.budget_exceeded},
                        {"iterations", x.iterations},
                        {"classes", x.classes},
                        {"cutlines_considered", x.cutlines_considered},
                        {"elapsed_us", x.elapsed_us}});
    return {{"spec", bench_spec_to_json(r.spec)},
            {"init",
             {{"cells", r.init.cells},
              {"cutlines", r.init.cutlines},
              {"holes", r.init.holes},
              {"elapsed_us", r.init.elapsed_us}}},
            {"c_optimal_definition", "minimum over all runs of this report and the 8-connected grid Dijkstra oracle"},
            {"oracles", oracles},
            {"summary", summary},
            {"runs", runs}};
}

std::string summary_to_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "task,planner,beta,runs,successes,reached_2pct,mean_t_init_us,median_t_init_us,mean_t_2pct_us,"
           "median_t_2pct_us,mean_opt_time_us,mean_length_ratio,mean_cutlines_considered,mean_elapsed_us,c_optimal\n";
    for (const auto& s : r.summary)
        out << s.task << ',' << s.planner << ',' << s.beta << ',' << s.runs << ',' << s.successes << ',' << s.reached
            << ',' << csv_num(s.mean_t_init_us) << ',' << csv_num(s.median_t_init_us) << ','
            << csv_num(s.mean_t_2pct_us) << ',' << csv_num(s.median_t_2pct_us) << ',' << csv_num(s.mean_opt_time_us)
            << ',' << csv_num(s.mean_length_ratio) << ',' << csv_num(s.mean_cutlines_considered) << ','
            << csv_num(s.mean_elapsed_us) << ',' << csv_num(r.oracles[static_cast<std::size_t>(s.task)].c_optimal)
            << '\n';
    return out.str();
}

std::string runs_to_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "task,planner,beta,rep,seed,success,length,t_init_us,t_2pct_us,budget_exceeded,iterations,classes,"
           "cutlines_considered,elapsed_us\n";
    for (const auto& x : r.runs)
        out << x.task << ',' << x.planner << ',' << x.beta << ',' << x.rep << ',' << x.seed << ',' << x.success << ','
            << (x.success ? csv_num(x.length) : "") << ',' << csv_num(x.t_init_us) << ',' << csv_num(x.t_2pct_us)
            << ',' << x.budget_exceeded << ',' << x.iterations << ',' << x.classes << ',' << x.cutlines_considered
            << ',' << csv_num(x.elapsed_us) << '\n';
    return out.str();
}

double median_or_inf(std::vector<std::optional<double>> v) {
    std::vector<double> x;
    for (const auto& e : v) x.push_back(e.value_or(std::numeric_limits<double>::infinity()));
    if (x.empty()) return std::numeric_limits<double>::infinity();
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double sign_test_p(int wins, int trials) {
    if (trials <= 0) return 1.0;
    // Sum of binomial tail terms in log space.
    double p = 0.0;
    for (int k = wins; k <= trials; ++k)
        p += std::exp(std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) -
                      trials * std::log(2.0));
    return std::min(1.0, p);
}

Interval bootstrap_mean_diff(const std::vector<double>& a, const std::vector<double>& b, int resamples,
                             double level, std::uint64_t seed) {
    if (a.empty() || b.empty() || resamples < 1) throw InvalidInput("bootstrap: empty sample");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> ia(0, a.size() - 1), ib(0, b.size() - 1);
    std::vector<double> diffs(static_cast<std::size_t>(resamples));
    for (auto& d : diffs) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sa += a[ia(rng)];
        for (std::size_t i = 0; i < b.size(); ++i) sb += b[ib(rng)];
        d = sa / a.size() - sb / b.size();
    }
    std::sort(diffs.begin(), diffs.end());
    const double tail = 0.5 * (1.0 - level);
    auto q = [&](double f) {
        const auto idx = static_cast<std::size_t>(std::clamp(f * (resamples - 1), 0.0, resamples - 1.0));
        return diffs[idx];
    };
    return {q(tail), q(1.0 - tail)};
}

}  // namespace cdt
