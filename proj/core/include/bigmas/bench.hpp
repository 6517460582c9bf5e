#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bigmas/baselines.hpp"
#include "bigmas/json.hpp"
#include "bigmas/run_config.hpp"
#include "bigmas/tasks.hpp"

namespace bigmas::bench {

inline constexpr int kCsvSchemaVersion = 1;

struct BenchConfig {
    std::vector<tasks::TaskKind> task_kinds; // default: all three
    std::vector<std::string> methods;        // bigmas | base | react | tot
    int count = 5;
    std::uint64_t seed = 0;
    int parallelism = 1;
    std::string backend = "scripted"; // scripted | http
    std::string script;               // manifest path for the scripted backend
    std::string model;                // http backend override; empty = env/default
    std::string out_dir = "bench_out";
    bool relax_tol_optimality = false;
    RunConfig run;
    baselines::BaselineConfig baseline;
};

/// Throws std::runtime_error with a "config-error: ..." message on unknown
/// tasks/methods/backends or non-positive counts.
BenchConfig bench_config_from_json(const Json& doc);
BenchConfig load_bench_config(const std::string& path);
Json bench_config_to_json(const BenchConfig& config);

/// One (instance, method) cell. Records hold everything the metrics need:
/// the verdict (always from the tasks verifier), the design's topology,
/// routing counts, and the per-phase ledger. Wall time is kept out of the
/// serialized record so reruns with a scripted backend are byte-identical;
/// it travels in a separate timings file.
struct RunRecord {
    std::string task;
    std::string method;
    int index = 0;  // instance index within the task
    Json instance;  // full instance document
    Json design;    // design interchange + used_fallback; null for baselines
    std::string answer;
    bool correct = false;
    std::string reason;
    std::string termination; // empty for baselines
    std::string fallback_source;
    int steps = 0;  // node visits (bigmas) or model calls (baselines)
    int route_invocations = 0;
    int routing_decisions = 0;
    Json usage = Json::object(); // per-phase calls and tokens
    std::string error;           // cell-level failure; run scored incorrect
    double wall_ms = 0;          // not serialized

    Json to_json() const;
    static bool from_json(const Json& doc, RunRecord& out, std::string& error);
};

/// Executes every (task, method, instance) cell with a bounded worker
/// pool, appending records to <out_dir>/runs.jsonl in cell order as they
/// complete (crash-safe: each line lands complete and flushed). Cell
/// failures become error records; the run continues. Also writes
/// timings.csv and the metric CSV files.
std::vector<RunRecord> run_benchmark(const BenchConfig& config);

std::vector<RunRecord> load_run_records(const std::string& path);

struct Stats {
    double mean = 0;
    double sd = 0; // population
    double min = 0;
    double max = 0;
    int n = 0;
};
Stats compute_stats(const std::vector<double>& xs);

struct RoutingSplit {
    int n = 0;
    double mean = 0;
    double ci95 = 0; // 1.96 * sd / sqrt(n), normal approximation
    double max = 0;
};

struct CellMetrics {
    std::string task;
    std::string method;
    int runs = 0;
    int correct = 0;
    double accuracy = 0; // percent
    Stats nodes;         // graph methods only
    Stats edges;
    std::map<std::string, double> role_percent;    // category -> % of nodes
    RoutingSplit routing_correct;
    RoutingSplit routing_incorrect;
    std::map<std::string, std::int64_t> phase_tokens;
    std::map<std::string, double> token_share; // phase -> % of cell total
};

struct MetricsSummary {
    std::vector<CellMetrics> cells; // ordered by (task, method) first appearance
};

/// Pure function of the records: recomputing from a reloaded runs.jsonl
/// gives identical results.
MetricsSummary compute_metrics(const std::vector<RunRecord>& records);

/// summary.csv, topology.csv, roles.csv, routing.csv, tokens.csv.
void write_metric_files(const MetricsSummary& summary, const std::string& dir);

} // namespace bigmas::bench
