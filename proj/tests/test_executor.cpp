#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bigmas/executor.hpp"
#include "bigmas/trace.hpp"
#include "helpers.hpp"

using namespace bigmas;

namespace {

// Seed 7 draws the numbers {6, 10, 7, 2}; ((2+6)*(10-7)) solves it.
const char* kSolution = "((2+6)*(10-7))";

tasks::Instance game24_instance() {
    return tasks::generate_instances(tasks::TaskKind::Game24, 1, 7)[0];
}

DesignOutput chain_design() {
    DesignOutput d;
    d.graph.nodes = {{"gen", "generator", "append candidates"},
                     {"val", "validator", "record verdicts"},
                     {"fmt", "formatter", "write the answer"}};
    d.graph.edges = {{"gen", "val"}, {"val", "fmt"}};
    d.graph.source = "gen";
    d.graph.sink = "fmt";
    d.work_schema = Json{{"candidates", Json::array()}, {"validated", Json::object()}};
    d.contract = "gen appends to candidates, val updates validated, fmt writes the answer.";
    return d;
}

std::string write_json(const std::string& path, const std::string& action, Json payload) {
    return Json{{"target_path", path}, {"action", action}, {"payload", std::move(payload)}}
        .dump();
}

} // namespace

TEST_CASE("happy path: a three-node chain runs source to sink") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.push_response(Phase::NodeExecution, write_json("candidates", "append", kSolution));
    backend.push_response(Phase::NodeExecution,
                          write_json("validated", "update", Json{{kSolution, true}}));
    backend.push_response(Phase::NodeExecution, write_json("answer", "replace", kSolution));

    auto instance = game24_instance();
    ExecutionResult result = run(instance, chain_design(), RunConfig{}, backend, ledger);

    CHECK(result.termination == Termination::Sink);
    CHECK(result.answer == kSolution);
    CHECK_FALSE(result.fallback_answer);
    REQUIRE(result.steps.size() == 3);

    CHECK(result.steps[0].node == "gen");
    CHECK(result.steps[1].node == "val");
    CHECK(result.steps[2].node == "fmt");
    for (const auto& step : result.steps) {
        CHECK(step.validation.pass);
        CHECK(step.corrections_used == 0);
        CHECK(step.responses.size() == 1);
        REQUIRE(step.applied.has_value());
        CHECK(step.pre_snapshot != step.post_snapshot);
    }

    // Single-successor hops route deterministically: lookups happen, but
    // none is a branch decision and none costs a model call.
    CHECK(result.route_invocations == 2);
    CHECK(result.routing_decisions == 0);
    CHECK(ledger.phase_usage(Phase::Routing).calls == 0);
    CHECK(ledger.phase_usage(Phase::NodeExecution).calls == 3);

    CHECK(result.workspace.sys["step"] == 3);
    CHECK(result.workspace.sys["visited"] == Json::array({"gen", "val", "fmt"}));
    CHECK(tasks::verify(instance, result.answer).correct);
}

TEST_CASE("a rejected write is corrected with the error in the follow-up prompt") {
    UsageLedger ledger;
    ScriptedBackend scripted(ledger);
    scripted.push_response(Phase::NodeExecution,
                           write_json("wrong_path", "append", kSolution)); // rejected
    scripted.push_response(Phase::NodeExecution,
                           write_json("candidates", "append", kSolution)); // corrected
    scripted.push_response(Phase::NodeExecution,
                           write_json("validated", "update", Json{{kSolution, true}}));
    scripted.push_response(Phase::NodeExecution, write_json("answer", "replace", kSolution));
    test_support::RecordingBackend backend(scripted);

    ExecutionResult result =
        run(game24_instance(), chain_design(), RunConfig{}, backend, ledger);

    CHECK(result.termination == Termination::Sink);
    REQUIRE(result.steps.size() == 3);
    const StepRecord& first = result.steps[0];
    CHECK(first.corrections_used == 1);
    CHECK(first.responses.size() == 2);
    CHECK(first.validation.pass);

    // The correction prompt carries the machine-readable failure.
    REQUIRE(backend.calls.size() >= 2);
    CHECK(backend.calls[1].user.find("unknown-path") != std::string::npos);
}

TEST_CASE("unparsable replies consume corrections like invalid writes") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.push_response(Phase::NodeExecution, "I would rather chat about the weather.");
    backend.push_response(Phase::NodeExecution, write_json("candidates", "append", kSolution));
    backend.push_response(Phase::NodeExecution,
                          write_json("validated", "update", Json{{kSolution, true}}));
    backend.push_response(Phase::NodeExecution, write_json("answer", "replace", kSolution));

    ExecutionResult result =
        run(game24_instance(), chain_design(), RunConfig{}, backend, ledger);
    CHECK(result.steps[0].corrections_used == 1);
    CHECK(result.steps[0].validation.pass);
    CHECK(result.termination == Termination::Sink);
}

TEST_CASE("correction exhaustion sends control to the sink") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    // Every node call targets a path that does not exist.
    backend.set_default(Phase::NodeExecution, write_json("ghost", "append", "x"));

    RunConfig cfg;
    ExecutionResult result = run(game24_instance(), chain_design(), cfg, backend, ledger);

    CHECK(result.termination == Termination::NodeFailureToSink);
    REQUIRE(result.steps.size() == 2); // failed source, then the sink (also failing)
    const StepRecord& source = result.steps[0];
    CHECK(source.node == "gen");
    CHECK(source.corrections_used == cfg.r_max);
    CHECK(source.responses.size() == static_cast<std::size_t>(1 + cfg.r_max));
    CHECK_FALSE(source.validation.pass);
    CHECK_FALSE(source.applied.has_value());
    // Failed writes leave no trace in the workspace.
    CHECK(source.pre_snapshot == source.post_snapshot);

    CHECK(result.steps[1].node == "fmt");
    CHECK(result.route_invocations == 0); // the failure branch never routes

    // Nothing was ever written, so the fallback marks the answer empty.
    CHECK(result.fallback_answer);
    CHECK(result.fallback_source == "empty-marker");
    CHECK(result.answer == kEmptyAnswerMarker);
}

TEST_CASE("gateway failures during node execution burn correction attempts") {
    struct FlakyBackend : ModelBackend {
        UsageLedger& ledger;
        int failures_left;
        std::string good_write;
        int served = 0;
        FlakyBackend(UsageLedger& l, int failures, std::string w)
            : ledger(l), failures_left(failures), good_write(std::move(w)) {}
        std::string name() const override { return "flaky"; }
        std::string generate(Phase phase, const std::string& system,
                             const std::string& user, int) override {
            (void)system;
            (void)user;
            if (phase == Phase::NodeExecution && failures_left > 0) {
                --failures_left;
                throw GatewayError("connection reset");
            }
            ledger.add(phase, 1, 1);
            ++served;
            return good_write;
        }
    };

    UsageLedger ledger;
    // One failing call, then a steady stream of sink-style answer writes.
    FlakyBackend backend(ledger, 1, write_json("candidates", "append", kSolution));
    ExecutionResult result =
        run(game24_instance(), chain_design(), RunConfig{}, backend, ledger);

    const StepRecord& first = result.steps[0];
    CHECK(first.corrections_used == 1);
    CHECK(first.responses.size() == 1); // the failed call produced no text
    CHECK(first.validation.pass);
}

TEST_CASE("budget exhaustion triggers the fallback scan") {
    DesignOutput d = chain_design();
    d.graph.edges = {{"gen", "val"}, {"val", "gen"}, {"val", "fmt"}}; // loop available

    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.push_response(Phase::NodeExecution,
                          write_json("candidates", "append", "(6+10)*(7-2)")); // wrong value
    backend.set_default(Phase::NodeExecution,
                        write_json("candidates", "append", kSolution));
    backend.set_default(Phase::Routing, "gen"); // always loop away from the sink

    RunConfig cfg;
    cfg.t_max = 5;
    auto instance = game24_instance();
    ExecutionResult result = run(instance, d, cfg, backend, ledger);

    CHECK(result.termination == Termination::BudgetExhausted);
    CHECK(result.steps.size() == 5);
    CHECK(result.routing_decisions >= 1); // val has two successors

    // The scavenger prefers the candidate that actually verifies.
    CHECK(result.fallback_answer);
    CHECK(result.fallback_source == "verified-candidate");
    CHECK(result.answer == kSolution);
    CHECK(tasks::verify(instance, result.answer).correct);
}

TEST_CASE("fallback scan: recent output when nothing verifies, marker when empty") {
    auto instance = game24_instance();

    SUBCASE("newest applied payload without a verified candidate") {
        Workspace ws = init_workspace("ctx", Json{{"candidates", Json::array()}});
        std::vector<StepRecord> steps(2);
        WriteInstruction w0;
        w0.path = {"candidates"};
        w0.action = WriteAction::Append;
        w0.payload = "older note";
        steps[0].applied = w0;
        WriteInstruction w1 = w0;
        w1.payload = "6+10+7+2"; // evaluates to 25: present but not a solution
        steps[1].applied = w1;
        // Neither payload reached the workspace's candidate list, so the
        // history is the only source.
        FallbackOutcome fb = fallback_resolve(ws, steps, instance);
        CHECK(fb.source == "recent-output");
        CHECK(fb.answer == "6+10+7+2");
        CHECK(answer_text(ws) == "6+10+7+2");
    }
    SUBCASE("verified candidate beats newer unverified text") {
        Workspace ws = init_workspace(
            "ctx", Json{{"candidates", Json::array({"junk", kSolution, "more junk"})}});
        FallbackOutcome fb = fallback_resolve(ws, {}, instance);
        CHECK(fb.source == "verified-candidate");
        CHECK(fb.answer == kSolution);
    }
    SUBCASE("nothing anywhere") {
        Workspace ws = init_workspace("ctx", Json{{"candidates", Json::array()}});
        FallbackOutcome fb = fallback_resolve(ws, {}, instance);
        CHECK(fb.source == "empty-marker");
        CHECK(fb.answer == kEmptyAnswerMarker);
    }
}

TEST_CASE("prompts expose role, contract, and sink answer rights") {
    DesignOutput d = chain_design();
    std::string gen_prompt = node_system_prompt(d.graph.nodes[0], d, false);
    CHECK(gen_prompt.find("generator") != std::string::npos);
    CHECK(gen_prompt.find(d.contract) != std::string::npos);
    CHECK(gen_prompt.find("target_path") != std::string::npos);
    CHECK(gen_prompt.find("answer slot is yours") == std::string::npos);

    std::string sink_prompt = node_system_prompt(d.graph.nodes[2], d, true);
    CHECK(sink_prompt.find("answer") != std::string::npos);

    Workspace ws = init_workspace("the problem text", d.work_schema);
    std::string user = node_user_prompt(ws, d.graph.nodes[0], false, "");
    CHECK(user.find("the problem text") != std::string::npos);
    CHECK(user.find(serialize_workspace(ws)) != std::string::npos);

    std::string corrected = node_user_prompt(ws, d.graph.nodes[0], false,
                                             "Error code: unknown-path");
    CHECK(corrected.find("unknown-path") != std::string::npos);
}

TEST_CASE("degenerate budgets are rejected") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    RunConfig cfg;
    cfg.t_max = 0;
    CHECK_THROWS_AS(run(game24_instance(), chain_design(), cfg, backend, ledger),
                    std::invalid_argument);
    cfg.t_max = 15;
    cfg.r_max = 0;
    CHECK_THROWS_AS(run(game24_instance(), chain_design(), cfg, backend, ledger),
                    std::invalid_argument);
}

TEST_CASE("budget safety: calls never exceed the configured envelope") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.set_default(Phase::NodeExecution, "never a valid instruction");
    backend.set_default(Phase::Routing, "gen");

    RunConfig cfg;
    cfg.t_max = 4;
    cfg.r_max = 2;
    ExecutionResult result = run(game24_instance(), chain_design(), cfg, backend, ledger);
    CHECK(result.termination == Termination::NodeFailureToSink);
    // Each visit costs at most 1 + r_max node calls.
    CHECK(ledger.phase_usage(Phase::NodeExecution).calls <=
          static_cast<std::int64_t>(cfg.t_max) * (1 + cfg.r_max));
}

TEST_CASE("solve chains the design phase into execution") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.set_default(Phase::Design, "no design here"); // forces the default chain
    backend.push_response(Phase::NodeExecution,
                          write_json("candidates", "append", kSolution));
    backend.push_response(
        Phase::NodeExecution,
        write_json("validated", "update", Json{{kSolution, "pass"}}));
    backend.push_response(Phase::NodeExecution, write_json("answer", "replace", kSolution));

    SolveResult sr = solve(game24_instance(), RunConfig{}, backend, ledger);
    CHECK(sr.design.used_fallback);
    CHECK(sr.execution.termination == Termination::Sink);
    CHECK(sr.execution.answer == kSolution);
    CHECK(ledger.phase_usage(Phase::Design).calls == 2);
}

TEST_CASE("traces replay to the exact final workspace") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.set_default(Phase::Design, "be invalid");
    backend.push_response(Phase::NodeExecution, "garbage first");
    backend.push_response(Phase::NodeExecution,
                          write_json("candidates", "append", kSolution));
    backend.push_response(
        Phase::NodeExecution,
        write_json("validated", "update", Json{{kSolution, "pass"}}));
    backend.push_response(Phase::NodeExecution, write_json("answer", "replace", kSolution));

    auto instance = game24_instance();
    RunConfig cfg;
    SolveResult sr = solve(instance, cfg, backend, ledger);
    tasks::Verdict verdict = tasks::verify(instance, sr.execution.answer);
    auto records =
        build_run_trace(instance, cfg, sr.design, sr.execution, verdict, ledger);

    test_support::TempDir dir("trace");
    write_jsonl(dir.file("run.jsonl"), records);
    auto loaded = load_jsonl(dir.file("run.jsonl"));
    REQUIRE(loaded.size() == records.size());

    ReplayOutcome replay = replay_trace(loaded);
    CHECK(replay.ok);
    CHECK(serialize_workspace(replay.workspace) ==
          serialize_workspace(sr.execution.workspace));

    SUBCASE("tampered traces are detected") {
        auto broken = loaded;
        // Drop the sink's step record; the final workspace no longer matches.
        broken.erase(broken.end() - 2);
        ReplayOutcome bad = replay_trace(broken);
        CHECK_FALSE(bad.ok);
        CHECK_FALSE(bad.error.empty());
    }
    SUBCASE("traces with identical inputs are byte-identical") {
        UsageLedger ledger2;
        ScriptedBackend backend2(ledger2);
        backend2.set_default(Phase::Design, "be invalid");
        backend2.push_response(Phase::NodeExecution, "garbage first");
        backend2.push_response(Phase::NodeExecution,
                               write_json("candidates", "append", kSolution));
        backend2.push_response(
            Phase::NodeExecution,
            write_json("validated", "update", Json{{kSolution, "pass"}}));
        backend2.push_response(Phase::NodeExecution,
                               write_json("answer", "replace", kSolution));
        SolveResult sr2 = solve(instance, cfg, backend2, ledger2);
        auto records2 = build_run_trace(instance, cfg, sr2.design, sr2.execution,
                                        tasks::verify(instance, sr2.execution.answer),
                                        ledger2);
        write_jsonl(dir.file("run2.jsonl"), records2);
        CHECK(test_support::read_file(dir.file("run.jsonl")) ==
              test_support::read_file(dir.file("run2.jsonl")));
    }
}
