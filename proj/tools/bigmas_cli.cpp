#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "bigmas/baselines.hpp"
#include "bigmas/bench.hpp"
#include "bigmas/executor.hpp"
#include "bigmas/tasks.hpp"
#include "bigmas/trace.hpp"

namespace {

using namespace bigmas;

std::unique_ptr<ModelBackend> make_backend(const std::string& backend,
                                           const std::string& script,
                                           const std::string& model, double temperature,
                                           UsageLedger& ledger) {
    if (backend == "scripted") {
        auto b = std::make_unique<ScriptedBackend>(ledger);
        if (!script.empty()) load_script_manifest(script, *b);
        return b;
    }
    if (backend == "http") {
        HttpBackendConfig cfg = HttpBackendConfig::from_env();
        if (!model.empty()) cfg.model = model;
        cfg.temperature = temperature;
        return std::make_unique<HttpBackend>(std::move(cfg), ledger);
    }
    throw std::runtime_error("config-error: unknown backend '" + backend +
                             "' (expected scripted or http)");
}

tasks::TaskKind parse_task_or_throw(const std::string& name) {
    tasks::TaskKind kind;
    if (!tasks::parse_task_name(name, kind))
        throw std::runtime_error("config-error: unknown task '" + name +
                                 "' (expected game24, sixfives or tol)");
    return kind;
}

int cmd_gen(const std::string& task, int count, std::uint64_t seed,
            const std::string& out) {
    auto list = tasks::generate_instances(parse_task_or_throw(task), count, seed);
    tasks::save_instances(out, list);
    std::cout << "wrote " << list.size() << " " << task << " instances to " << out
              << "\n";
    return 0;
}

int cmd_oracle(const std::string& in, const std::string& out) {
    auto list = tasks::load_instances(in);
    int solvable = 0;
    for (auto& inst : list) {
        auto solution = tasks::oracle_solve(inst);
        inst.oracle["solution"] = solution ? Json(*solution) : Json(nullptr);
        if (solution) ++solvable;
    }
    const std::string target = out.empty() ? in : out;
    tasks::save_instances(target, list);
    std::cout << "annotated " << list.size() << " instances (" << solvable
              << " solvable) -> " << target << "\n";
    return 0;
}

int cmd_run(const std::string& task, const std::string& instances_path, int index,
            const std::string& method, const std::string& backend_name,
            const std::string& script, const std::string& model,
            const std::string& trace_path, std::uint64_t seed, bool strict,
            bool relax) {
    tasks::Instance inst;
    if (instances_path.empty()) {
        auto list = tasks::generate_instances(parse_task_or_throw(task), index + 1, seed);
        inst = list.at(static_cast<std::size_t>(index));
    } else {
        auto list = tasks::load_instances(instances_path);
        if (index < 0 || static_cast<std::size_t>(index) >= list.size())
            throw std::runtime_error("config-error: --index " + std::to_string(index) +
                                     " out of range for " + instances_path);
        inst = list[static_cast<std::size_t>(index)];
    }

    RunConfig run_cfg;
    run_cfg.seed = seed;
    UsageLedger ledger;
    auto backend = make_backend(backend_name, script, model, run_cfg.temperature, ledger);

    std::string answer;
    tasks::Verdict verdict;
    std::vector<Json> trace;
    if (method == "bigmas") {
        SolveResult sr = solve(inst, run_cfg, *backend, ledger);
        answer = sr.execution.answer;
        verdict = tasks::verify(inst, answer, relax);
        trace = build_run_trace(inst, run_cfg, sr.design, sr.execution, verdict, ledger);
        std::cout << "termination: " << termination_name(sr.execution.termination)
                  << "\n";
        if (sr.execution.fallback_answer)
            std::cout << "fallback: " << sr.execution.fallback_source << "\n";
    } else {
        baselines::BaselineConfig cfg;
        if (!baselines::parse_kind(method, cfg.kind))
            throw std::runtime_error("config-error: unknown method '" + method +
                                     "' (expected bigmas, base, react or tot)");
        baselines::BaselineResult res =
            baselines::run_baseline(inst, *backend, cfg, run_cfg, ledger);
        answer = res.answer;
        verdict = tasks::verify(inst, answer, relax);
        trace.push_back(run_header_record(inst, method, run_cfg, nullptr));
        for (const auto& step : res.steps) trace.push_back(step);
        trace.push_back(Json{{"type", "result"},
                             {"answer", answer},
                             {"termination", ""},
                             {"fallback", Json(nullptr)},
                             {"workspace", ""},
                             {"verdict", Json{{"correct", verdict.correct},
                                              {"reason", verdict.reason}}},
                             {"usage", ledger.to_json()},
                             {"error", res.error}});
        if (!res.error.empty()) std::cout << "gateway error: " << res.error << "\n";
    }

    Usage total = ledger.total();
    std::cout << "answer: " << answer << "\n"
              << "verdict: "
              << (verdict.correct ? "correct" : "incorrect: " + verdict.reason) << "\n"
              << "usage: " << total.calls << " calls, " << total.total_tokens()
              << " tokens\n";
    if (!trace_path.empty()) {
        write_jsonl(trace_path, trace);
        std::cout << "trace: " << trace_path << "\n";
    }
    return strict && !verdict.correct ? 1 : 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir_override) {
    bench::BenchConfig cfg = bench::load_bench_config(config_path);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    auto records = bench::run_benchmark(cfg);
    int correct = 0;
    int errors = 0;
    for (const auto& rec : records) {
        if (rec.correct) ++correct;
        if (!rec.error.empty()) ++errors;
    }
    std::cout << records.size() << " runs, " << correct << " correct, " << errors
              << " errored -> " << cfg.out_dir << "/runs.jsonl\n";
    return errors > 0 ? 1 : 0;
}

int cmd_stats(const std::string& runs_path, std::string out_dir) {
    auto records = bench::load_run_records(runs_path);
    if (records.empty())
        throw std::runtime_error("config-error: no records in " + runs_path);
    if (out_dir.empty()) {
        auto parent = std::filesystem::path(runs_path).parent_path();
        out_dir = parent.empty() ? "." : parent.string();
    }
    bench::MetricsSummary summary = bench::compute_metrics(records);
    bench::write_metric_files(summary, out_dir);
    for (const auto& cell : summary.cells)
        std::cout << cell.task << "/" << cell.method << ": " << cell.runs << " runs, "
                  << cell.accuracy << "% correct\n";
    std::cout << "metrics -> " << out_dir << "/summary.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph multi-agent runner for verifiable reasoning tasks"};
    app.require_subcommand(1);

    std::string task = "game24";
    int count = 10;
    std::uint64_t seed = 0;
    std::string out;
    auto* gen = app.add_subcommand("gen", "Generate task instances (JSONL)");
    gen->add_option("--task", task, "game24 | sixfives | tol")->required();
    gen->add_option("--count", count, "instances to generate")->required();
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--out", out, "output JSONL path")->required();

    std::string oracle_in, oracle_out;
    auto* oracle = app.add_subcommand("oracle", "Annotate instances with brute-force solutions");
    oracle->add_option("--in", oracle_in, "instances JSONL")->required();
    oracle->add_option("--out", oracle_out, "output path (default: rewrite --in)");

    std::string run_task = "game24", instances_path, method = "bigmas";
    std::string backend = "scripted", script, model, trace_path;
    int index = 0;
    std::uint64_t run_seed = 0;
    bool strict = false, relax = false;
    auto* run = app.add_subcommand("run", "Execute one instance with one method");
    run->add_option("--task", run_task, "task when generating on the fly");
    run->add_option("--instance", instances_path, "instances JSONL (omit to generate)");
    run->add_option("--index", index, "instance index");
    run->add_option("--method", method, "bigmas | base | react | tot");
    run->add_option("--backend", backend, "scripted | http");
    run->add_option("--script", script, "scripted-response manifest (JSONL)");
    run->add_option("--model", model, "http backend model override");
    run->add_option("--trace", trace_path, "write the run trace here");
    run->add_option("--seed", run_seed, "instance/run seed");
    run->add_flag("--strict", strict, "exit 1 when the verdict is incorrect");
    run->add_flag("--relax-tol", relax, "accept non-optimal Tower of London solutions");

    std::string bench_config, bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark config");
    bench_cmd->add_option("--config", bench_config, "benchmark config JSON")->required();
    bench_cmd->add_option("--out-dir", bench_out, "override the config's output dir");

    std::string runs_path, stats_out;
    auto* stats = app.add_subcommand("stats", "Recompute metric CSVs from runs.jsonl");
    stats->add_option("--runs", runs_path, "runs.jsonl path")->required();
    stats->add_option("--out-dir", stats_out, "where to write the CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(task, count, seed, out);
        if (oracle->parsed()) return cmd_oracle(oracle_in, oracle_out);
        if (run->parsed())
            return cmd_run(run_task, instances_path, index, method, backend, script,
                           model, trace_path, run_seed, strict, relax);
        if (bench_cmd->parsed()) return cmd_bench(bench_config, bench_out);
        if (stats->parsed()) return cmd_stats(runs_path, stats_out);
    } catch (const GatewayError& e) {
        std::cerr << "gateway failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2; // no subcommand matched (require_subcommand should prevent this)
}
