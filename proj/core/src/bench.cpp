#include "bigmas/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "bigmas/agent_graph.hpp"
#include "bigmas/executor.hpp"
#include "bigmas/text_scan.hpp"

namespace bigmas::bench {

namespace {

[[noreturn]] void config_error(const std::string& why) {
    throw std::runtime_error("config-error: " + why);
}

bool known_method(const std::string& m) {
    return m == "bigmas" || m == "base" || m == "react" || m == "tot";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

BenchConfig bench_config_from_json(const Json& doc) {
    if (!doc.is_object()) config_error("config must be a JSON object");
    BenchConfig cfg;

    if (doc.contains("tasks")) {
        if (!doc["tasks"].is_array() || doc["tasks"].empty())
            config_error("'tasks' must be a non-empty array");
        for (const auto& t : doc["tasks"]) {
            tasks::TaskKind kind;
            if (!t.is_string() || !tasks::parse_task_name(t.get<std::string>(), kind))
                config_error("unknown task " + t.dump());
            cfg.task_kinds.push_back(kind);
        }
    } else {
        cfg.task_kinds = {tasks::TaskKind::Game24, tasks::TaskKind::SixFives,
                          tasks::TaskKind::TowerOfLondon};
    }

    if (doc.contains("methods")) {
        if (!doc["methods"].is_array() || doc["methods"].empty())
            config_error("'methods' must be a non-empty array");
        for (const auto& m : doc["methods"]) {
            if (!m.is_string() || !known_method(m.get<std::string>()))
                config_error("unknown method " + m.dump());
            cfg.methods.push_back(m.get<std::string>());
        }
    } else {
        cfg.methods = {"bigmas", "base", "react", "tot"};
    }

    cfg.count = doc.value("count", cfg.count);
    if (cfg.count <= 0) config_error("'count' must be positive");
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.parallelism = doc.value("parallelism", cfg.parallelism);
    if (cfg.parallelism <= 0) config_error("'parallelism' must be positive");
    cfg.backend = doc.value("backend", cfg.backend);
    if (cfg.backend != "scripted" && cfg.backend != "http")
        config_error("unknown backend '" + cfg.backend + "'");
    cfg.script = doc.value("script", cfg.script);
    cfg.model = doc.value("model", cfg.model);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.relax_tol_optimality = doc.value("relax_tol_optimality", cfg.relax_tol_optimality);

    if (doc.contains("run")) {
        if (!doc["run"].is_object()) config_error("'run' must be an object");
        cfg.run = run_config_from_json(doc["run"]);
    }
    if (doc.contains("baseline")) {
        const Json& b = doc["baseline"];
        if (!b.is_object()) config_error("'baseline' must be an object");
        cfg.baseline.react_max_turns = b.value("react_max_turns", cfg.baseline.react_max_turns);
        cfg.baseline.tot_max_rounds = b.value("tot_max_rounds", cfg.baseline.tot_max_rounds);
        cfg.baseline.tot_n_thoughts = b.value("tot_n_thoughts", cfg.baseline.tot_n_thoughts);
        cfg.baseline.temperature = b.value("temperature", cfg.baseline.temperature);
        if (cfg.baseline.react_max_turns <= 0 || cfg.baseline.tot_max_rounds <= 0 ||
            cfg.baseline.tot_n_thoughts <= 0)
            config_error("baseline bounds must be positive");
    }
    return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open '" + path + "'");
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) config_error("'" + path + "' is not valid JSON");
    return bench_config_from_json(doc);
}

Json bench_config_to_json(const BenchConfig& config) {
    Json tasks_json = Json::array();
    for (auto k : config.task_kinds) tasks_json.push_back(tasks::task_name(k));
    return Json{{"tasks", tasks_json},
                {"methods", config.methods},
                {"count", config.count},
                {"seed", config.seed},
                {"parallelism", config.parallelism},
                {"backend", config.backend},
                {"script", config.script},
                {"model", config.model},
                {"out_dir", config.out_dir},
                {"relax_tol_optimality", config.relax_tol_optimality},
                {"run", run_config_to_json(config.run)},
                {"baseline", Json{{"react_max_turns", config.baseline.react_max_turns},
                                  {"tot_max_rounds", config.baseline.tot_max_rounds},
                                  {"tot_n_thoughts", config.baseline.tot_n_thoughts},
                                  {"temperature", config.baseline.temperature}}}};
}

Json RunRecord::to_json() const {
    return Json{{"task", task},
                {"method", method},
                {"index", index},
                {"instance", instance},
                {"design", design},
                {"answer", answer},
                {"correct", correct},
                {"reason", reason},
                {"termination", termination},
                {"fallback_source", fallback_source},
                {"steps", steps},
                {"route_invocations", route_invocations},
                {"routing_decisions", routing_decisions},
                {"usage", usage},
                {"error", error}};
}

bool RunRecord::from_json(const Json& doc, RunRecord& out, std::string& error) {
    if (!doc.is_object() || !doc.contains("task") || !doc.contains("method")) {
        error = "record must be an object with 'task' and 'method'";
        return false;
    }
    if (!doc["task"].is_string() || !doc["method"].is_string()) {
        error = "'task' and 'method' must be strings";
        return false;
    }
    out.task = doc["task"].get<std::string>();
    out.method = doc["method"].get<std::string>();
    out.index = doc.value("index", 0);
    out.instance = doc.value("instance", Json(nullptr));
    out.design = doc.value("design", Json(nullptr));
    out.answer = doc.value("answer", std::string());
    out.correct = doc.value("correct", false);
    out.reason = doc.value("reason", std::string());
    out.termination = doc.value("termination", std::string());
    out.fallback_source = doc.value("fallback_source", std::string());
    out.steps = doc.value("steps", 0);
    out.route_invocations = doc.value("route_invocations", 0);
    out.routing_decisions = doc.value("routing_decisions", 0);
    out.usage = doc.value("usage", Json::object());
    out.error = doc.value("error", std::string());
    return true;
}

namespace {

std::unique_ptr<ModelBackend> make_backend(const BenchConfig& config, UsageLedger& ledger) {
    if (config.backend == "scripted") {
        auto backend = std::make_unique<ScriptedBackend>(ledger);
        if (!config.script.empty()) load_script_manifest(config.script, *backend);
        return backend;
    }
    HttpBackendConfig hc = HttpBackendConfig::from_env();
    if (!config.model.empty()) hc.model = config.model;
    hc.temperature = config.run.temperature;
    return std::make_unique<HttpBackend>(std::move(hc), ledger);
}

RunRecord execute_cell(const BenchConfig& config, const tasks::Instance& instance,
                       const std::string& method, int index) {
    RunRecord rec;
    rec.task = tasks::task_name(instance.kind);
    rec.method = method;
    rec.index = index;
    rec.instance = tasks::instance_to_json(instance);

    const auto started = std::chrono::steady_clock::now();
    try {
        UsageLedger ledger;
        auto backend = make_backend(config, ledger);
        if (method == "bigmas") {
            SolveResult sr = solve(instance, config.run, *backend, ledger);
            rec.design = sr.design.design.to_json();
            rec.design["used_fallback"] = sr.design.used_fallback;
            rec.answer = sr.execution.answer;
            rec.termination = termination_name(sr.execution.termination);
            if (sr.execution.fallback_answer)
                rec.fallback_source = sr.execution.fallback_source;
            rec.steps = static_cast<int>(sr.execution.steps.size());
            rec.route_invocations = sr.execution.route_invocations;
            rec.routing_decisions = sr.execution.routing_decisions;
        } else {
            baselines::BaselineConfig bc = config.baseline;
            baselines::parse_kind(method, bc.kind);
            bc.temperature = config.run.temperature;
            baselines::BaselineResult br =
                baselines::run_baseline(instance, *backend, bc, config.run, ledger);
            rec.answer = br.answer;
            rec.steps = br.calls;
            rec.error = br.error;
        }
        rec.usage = ledger.to_json();
        tasks::Verdict v = tasks::verify(instance, rec.answer, config.relax_tol_optimality);
        rec.correct = v.correct;
        rec.reason = v.reason;
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.correct = false;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    return rec;
}

struct Cell {
    int task_index;
    std::string method;
    int instance_index;
};

} // namespace

std::vector<RunRecord> run_benchmark(const BenchConfig& config) {
    namespace fs = std::filesystem;
    if (config.backend == "scripted" && !config.script.empty() &&
        !std::ifstream(config.script))
        config_error("script manifest '" + config.script + "' is not readable");

    std::vector<std::vector<tasks::Instance>> instances;
    for (auto kind : config.task_kinds)
        instances.push_back(tasks::generate_instances(kind, config.count, config.seed));

    std::vector<Cell> cells;
    for (std::size_t t = 0; t < config.task_kinds.size(); ++t)
        for (const auto& m : config.methods)
            for (int i = 0; i < config.count; ++i)
                cells.push_back(Cell{static_cast<int>(t), m, i});

    fs::create_directories(config.out_dir);
    const std::string runs_path = (fs::path(config.out_dir) / "runs.jsonl").string();
    std::ofstream out(runs_path, std::ios::trunc);
    if (!out) config_error("cannot open '" + runs_path + "' for writing");

    std::vector<RunRecord> records;
    records.reserve(cells.size());
    std::vector<std::optional<RunRecord>> slots(cells.size());
    std::atomic<std::size_t> next_cell{0};
    std::mutex append_mu;
    std::size_t next_write = 0;

    auto worker = [&] {
        while (true) {
            const std::size_t k = next_cell.fetch_add(1);
            if (k >= cells.size()) return;
            const Cell& cell = cells[k];
            RunRecord rec = execute_cell(
                config, instances[static_cast<std::size_t>(cell.task_index)]
                                 [static_cast<std::size_t>(cell.instance_index)],
                cell.method, cell.instance_index);
            // Records land in cell order regardless of which worker finishes
            // first; whoever fills the next gap drains the ready prefix.
            std::lock_guard<std::mutex> lock(append_mu);
            slots[k] = std::move(rec);
            while (next_write < slots.size() && slots[next_write]) {
                out << slots[next_write]->to_json().dump() << '\n';
                out.flush();
                records.push_back(std::move(*slots[next_write]));
                slots[next_write].reset();
                ++next_write;
            }
        }
    };

    const int worker_count = std::max(
        1, std::min(config.parallelism, static_cast<int>(cells.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    {
        const std::string timings_path =
            (fs::path(config.out_dir) / "timings.csv").string();
        std::ofstream timings(timings_path, std::ios::trunc);
        timings << "schema_version,task,method,index,wall_ms\n";
        for (const auto& rec : records)
            timings << kCsvSchemaVersion << ',' << csv_field(rec.task) << ','
                    << csv_field(rec.method) << ',' << rec.index << ','
                    << fmt_double(rec.wall_ms) << '\n';
    }

    write_metric_files(compute_metrics(records), config.out_dir);
    return records;
}

std::vector<RunRecord> load_run_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<RunRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json doc = Json::parse(line, nullptr, false);
        std::string err;
        RunRecord rec;
        if (doc.is_discarded() || !RunRecord::from_json(doc, rec, err))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad record" + (err.empty() ? "" : ": " + err));
        records.push_back(std::move(rec));
    }
    return records;
}

Stats compute_stats(const std::vector<double>& xs) {
    Stats s;
    s.n = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

namespace {

RoutingSplit routing_split(const std::vector<double>& xs) {
    RoutingSplit r;
    Stats s = compute_stats(xs);
    r.n = s.n;
    r.mean = s.mean;
    r.max = s.max;
    if (s.n > 0) r.ci95 = 1.96 * s.sd / std::sqrt(static_cast<double>(s.n));
    return r;
}

std::int64_t phase_total_tokens(const Json& usage, const std::string& phase) {
    if (!usage.is_object() || !usage.contains(phase)) return 0;
    const Json& u = usage[phase];
    return u.value("prompt_tokens", std::int64_t{0}) +
           u.value("completion_tokens", std::int64_t{0});
}

} // namespace

MetricsSummary compute_metrics(const std::vector<RunRecord>& records) {
    MetricsSummary summary;
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& rec : records) {
        auto key = std::make_pair(rec.task, rec.method);
        auto [it, inserted] = groups.emplace(key, std::vector<const RunRecord*>{});
        if (inserted) order.push_back(key);
        it->second.push_back(&rec);
    }

    for (const auto& key : order) {
        const auto& group = groups[key];
        CellMetrics cell;
        cell.task = key.first;
        cell.method = key.second;
        cell.runs = static_cast<int>(group.size());

        std::vector<double> nodes, edges, routing_ok, routing_bad;
        std::map<std::string, int> role_counts;
        int total_nodes = 0;
        for (const RunRecord* rec : group) {
            if (rec->correct) ++cell.correct;
            if (rec->design.is_object() && rec->design.contains("nodes")) {
                nodes.push_back(static_cast<double>(rec->design["nodes"].size()));
                edges.push_back(
                    static_cast<double>(rec->design.value("edges", Json::array()).size()));
                for (const auto& n : rec->design["nodes"]) {
                    const std::string text = n.value("role", std::string()) + " " +
                                             n.value("responsibilities", std::string());
                    ++role_counts[role_category_name(classify_role(text))];
                    ++total_nodes;
                }
                (rec->correct ? routing_ok : routing_bad)
                    .push_back(static_cast<double>(rec->route_invocations));
            }
            if (rec->usage.is_object())
                for (auto it = rec->usage.begin(); it != rec->usage.end(); ++it)
                    cell.phase_tokens[it.key()] += phase_total_tokens(rec->usage, it.key());
        }

        cell.accuracy = cell.runs
                            ? 100.0 * static_cast<double>(cell.correct) /
                                  static_cast<double>(cell.runs)
                            : 0.0;
        cell.nodes = compute_stats(nodes);
        cell.edges = compute_stats(edges);
        for (const auto& [cat, count] : role_counts)
            cell.role_percent[cat] =
                100.0 * static_cast<double>(count) / static_cast<double>(total_nodes);
        cell.routing_correct = routing_split(routing_ok);
        cell.routing_incorrect = routing_split(routing_bad);

        std::int64_t token_sum = 0;
        for (const auto& [phase, tokens] : cell.phase_tokens) token_sum += tokens;
        if (token_sum > 0)
            for (const auto& [phase, tokens] : cell.phase_tokens)
                cell.token_share[phase] =
                    100.0 * static_cast<double>(tokens) / static_cast<double>(token_sum);

        summary.cells.push_back(std::move(cell));
    }
    return summary;
}

void write_metric_files(const MetricsSummary& summary, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&dir](const char* name) {
        std::ofstream out(fs::path(dir) / name, std::ios::trunc);
        if (!out) throw std::runtime_error(std::string("cannot write ") + name);
        return out;
    };

    std::ofstream sum = open("summary.csv");
    sum << "schema_version,task,method,metric,value\n";
    auto row = [&sum](const CellMetrics& c, const std::string& metric, double value) {
        sum << kCsvSchemaVersion << ',' << csv_field(c.task) << ',' << csv_field(c.method)
            << ',' << metric << ',' << fmt_double(value) << '\n';
    };
    for (const auto& c : summary.cells) {
        row(c, "runs", c.runs);
        row(c, "correct", c.correct);
        row(c, "accuracy_pct", c.accuracy);
        if (c.nodes.n > 0) {
            row(c, "nodes_mean", c.nodes.mean);
            row(c, "nodes_sd", c.nodes.sd);
            row(c, "nodes_min", c.nodes.min);
            row(c, "nodes_max", c.nodes.max);
            row(c, "edges_mean", c.edges.mean);
            row(c, "edges_sd", c.edges.sd);
            row(c, "edges_min", c.edges.min);
            row(c, "edges_max", c.edges.max);
            for (const auto& [cat, pct] : c.role_percent)
                row(c, "role_" + cat + "_pct", pct);
            row(c, "routing_correct_mean", c.routing_correct.mean);
            row(c, "routing_correct_ci95", c.routing_correct.ci95);
            row(c, "routing_correct_max", c.routing_correct.max);
            row(c, "routing_incorrect_mean", c.routing_incorrect.mean);
            row(c, "routing_incorrect_ci95", c.routing_incorrect.ci95);
            row(c, "routing_incorrect_max", c.routing_incorrect.max);
        }
        for (const auto& [phase, pct] : c.token_share)
            row(c, "token_share_" + phase + "_pct", pct);
    }

    std::ofstream topo = open("topology.csv");
    topo << "schema_version,task,method,nodes_mean,nodes_sd,nodes_min,nodes_max,"
            "edges_mean,edges_sd,edges_min,edges_max\n";
    for (const auto& c : summary.cells) {
        if (c.nodes.n == 0) continue;
        topo << kCsvSchemaVersion << ',' << csv_field(c.task) << ','
             << csv_field(c.method) << ',' << fmt_double(c.nodes.mean) << ','
             << fmt_double(c.nodes.sd) << ',' << fmt_double(c.nodes.min) << ','
             << fmt_double(c.nodes.max) << ',' << fmt_double(c.edges.mean) << ','
             << fmt_double(c.edges.sd) << ',' << fmt_double(c.edges.min) << ','
             << fmt_double(c.edges.max) << '\n';
    }

    std::ofstream roles = open("roles.csv");
    roles << "schema_version,task,method,category,percent\n";
    for (const auto& c : summary.cells)
        for (const auto& [cat, pct] : c.role_percent)
            roles << kCsvSchemaVersion << ',' << csv_field(c.task) << ','
                  << csv_field(c.method) << ',' << cat << ',' << fmt_double(pct) << '\n';

    std::ofstream routing = open("routing.csv");
    routing << "schema_version,task,method,verdict,n,mean,ci95,max\n";
    for (const auto& c : summary.cells) {
        if (c.nodes.n == 0) continue;
        routing << kCsvSchemaVersion << ',' << csv_field(c.task) << ','
                << csv_field(c.method) << ",correct," << c.routing_correct.n << ','
                << fmt_double(c.routing_correct.mean) << ','
                << fmt_double(c.routing_correct.ci95) << ','
                << fmt_double(c.routing_correct.max) << '\n';
        routing << kCsvSchemaVersion << ',' << csv_field(c.task) << ','
                << csv_field(c.method) << ",incorrect," << c.routing_incorrect.n << ','
                << fmt_double(c.routing_incorrect.mean) << ','
                << fmt_double(c.routing_incorrect.ci95) << ','
                << fmt_double(c.routing_incorrect.max) << '\n';
    }

    std::ofstream tokens = open("tokens.csv");
    tokens << "schema_version,task,method,phase,tokens,percent\n";
    for (const auto& c : summary.cells)
        for (const auto& [phase, count] : c.phase_tokens)
            tokens << kCsvSchemaVersion << ',' << csv_field(c.task) << ','
                   << csv_field(c.method) << ',' << phase << ',' << count << ','
                   << fmt_double(c.token_share.count(phase) ? c.token_share.at(phase) : 0.0)
                   << '\n';
}

} // namespace bigmas::bench
