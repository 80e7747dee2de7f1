#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdt/io.hpp"
#include "cdt/planner.hpp"

namespace cdt {

struct BenchTask {
    Point2 start;
    Point2 goal;
};

/// When a single run may end early.
enum class StopRule {
    none,    // always use the full budget
    first,   // at the first solution
    target,  // once within 2% of the reference length
};

struct BenchSpec {
    std::string map_file;  // PGM or artifact; empty = generate
    std::string kind = "cluttered";
    int size = 200;
    int obstacles = 12;
    std::uint64_t map_seed = 1;
    double epsilon_fit = 1.0;

    std::vector<BenchTask> tasks;  // empty = the generator's suggested task
    std::vector<std::string> planners{"cdt", "rrt-star"};
    int repetitions = 10;
    std::vector<double> betas{0.2};
    double alpha = 1e9;
    int iterations = 5000;      // CDT planners
    int rrt_iterations = 0;     // 0 = same as iterations
    double time_budget_ms = 0;  // RRT* wall-clock cap per run, 0 = none
    StopRule stop = StopRule::target;
    std::uint64_t seed = 1;  // repetition r uses seed + r for every planner
    int threads = 1;
};

/// Throws InvalidInput when the spec breaks its invariants.
void validate(const BenchSpec& spec);
BenchSpec bench_spec_from_json(const nlohmann::json& j);
nlohmann::json bench_spec_to_json(const BenchSpec& spec);
const char* stop_rule_name(StopRule s);

struct RunRecord {
    int task = 0;
    std::string planner;
    double beta = 0.0;
    int rep = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double length = 0.0;
    std::optional<double> t_init_us;
    std::optional<double> t_2pct_us;  // filled in after C_optimal is known
    int iterations = 0;
    int classes = 0;
    int cutlines_considered = 0;
    int cutlines_total = 0;
    double elapsed_us = 0.0;
    bool budget_exceeded = false;  // never reached the 2% band
    std::vector<Improvement> improvements;
};

struct TaskOracle {
    BenchTask task;
    double dijkstra = 0.0;   // 8-connected grid oracle
    double reference = 0.0;  // early-stop reference (min of oracle and reference runs)
    double c_optimal = 0.0;  // min over all runs and the oracle
    double raster_pixel = 0.0;
};

struct SummaryRow {
    int task = 0;
    std::string planner;
    double beta = 0.0;
    int runs = 0;
    int successes = 0;
    int reached = 0;  // runs that got within 2% of C_optimal
    std::optional<double> mean_t_init_us, median_t_init_us;
    std::optional<double> mean_t_2pct_us, median_t_2pct_us;
    std::optional<double> mean_opt_time_us;  // t_2pct - t_init over reaching runs
    std::optional<double> mean_length_ratio;  // final length / C_optimal over successes
    double mean_cutlines_considered = 0.0;
    double mean_elapsed_us = 0.0;
};

struct BenchReport {
    BenchSpec spec;
    InitStats init;
    std::vector<TaskOracle> oracles;
    std::vector<RunRecord> runs;
    std::vector<SummaryRow> summary;
};

BenchReport run_bench(const BenchSpec& spec);
BenchReport run_bench(const BenchSpec& spec, const MapArtifact& artifact);

nlohmann::json report_to_json(const BenchReport& r);
std::string summary_to_csv(const BenchReport& r);
std::string runs_to_csv(const BenchReport& r);

/// Median of values where a missing entry counts as +infinity.
double median_or_inf(std::vector<std::optional<double>> v);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(trials, 1/2).
double sign_test_p(int wins, int trials);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap interval for mean(a) - mean(b).
Interval bootstrap_mean_diff(const std::vector<double>& a, const std::vector<double>& b, int resamples,
                             double level, std::uint64_t seed);

}  // namespace cdt
