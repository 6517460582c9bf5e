#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bigmas/graph_designer.hpp"
#include "bigmas/instruction_parser.hpp"
#include "bigmas/model_gateway.hpp"
#include "bigmas/orchestrator.hpp"
#include "bigmas/run_config.hpp"
#include "bigmas/tasks.hpp"
#include "bigmas/workspace.hpp"

namespace bigmas {

enum class Termination {
    Sink,              // sink reached by routing and executed
    NodeFailureToSink, // sink reached via the repeated-failure branch
    BudgetExhausted,   // step budget ran out before the sink executed
};

std::string termination_name(Termination t);

/// Everything that happened during one loop iteration (one node visit).
struct StepRecord {
    int index = 0;
    std::string node;
    std::vector<std::string> responses; // initial reply + one per correction call
    ParseOutcome parse;                 // of the last reply that was evaluated
    int corrections_used = 0;
    ValidationResult validation;        // final verdict for the visit
    std::optional<WriteInstruction> applied;
    std::optional<RoutingDecision> routing; // absent on failure branch and sink
    std::string pre_snapshot;  // canonical workspace before the write window
    std::string post_snapshot; // canonical workspace after (== pre when failed)
    Json calls = Json::array(); // per-call usage: {phase, prompt_tokens, completion_tokens}

    Json to_json() const;
};

struct ExecutionResult {
    std::string answer;
    Termination termination = Termination::Sink;
    bool fallback_answer = false; // answer written by the budget fallback scan
    std::string fallback_source;  // verified-candidate | recent-output | empty-marker
    std::vector<StepRecord> steps;
    Workspace workspace; // final state
    int route_invocations = 0;  // all routing lookups
    int routing_decisions = 0;  // lookups with more than one successor
};

/// The node prompt pair. The system half carries the role, the contract,
/// and the write-instruction format; the user half carries the problem,
/// the serialized workspace, and (on corrections) the validation error.
std::string node_system_prompt(const NodeSpec& node, const DesignOutput& design,
                               bool is_sink);
std::string node_user_prompt(const Workspace& ws, const NodeSpec& node, bool is_sink,
                             const std::string& prior_error);

/// Scans `work` depth-first (object keys in sorted order, list elements in
/// order) for answer candidates: non-empty strings, and nested lists
/// rendered as compact JSON. The first candidate the task verifier accepts
/// is written to the answer slot; with no verified candidate the most
/// recent applied payload's text is used; with nothing at all an explicit
/// empty-answer marker is written. Returns what was written and why.
struct FallbackOutcome {
    std::string answer;
    std::string source; // "verified-candidate" | "recent-output" | "empty-marker"
};
FallbackOutcome fallback_resolve(Workspace& ws, const std::vector<StepRecord>& history,
                                 const tasks::Instance& instance);

inline constexpr const char* kEmptyAnswerMarker = "<no-answer>";

/// The execution loop: run nodes from the source, validate every write
/// with up to r_max corrections, apply-or-isolate, route, stop at the
/// sink or after t_max visits. A visit that exhausts its corrections
/// sends control to the sink, which still executes once. If the answer
/// slot is empty when the loop ends, fallback_resolve fills it. Model
/// usage lands in `ledger`; per-call deltas are recorded on each step.
ExecutionResult run(const tasks::Instance& instance, const DesignOutput& design,
                    const RunConfig& config, ModelBackend& backend, UsageLedger& ledger);

struct SolveResult {
    DesignResult design;
    ExecutionResult execution;
};

/// Design phase + execution loop.
SolveResult solve(const tasks::Instance& instance, const RunConfig& config,
                  ModelBackend& backend, UsageLedger& ledger);

} // namespace bigmas
