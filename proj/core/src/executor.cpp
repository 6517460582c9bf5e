// The execution loop: node calls, write validation with bounded
// self-correction, failure routing to the sink, the step budget, and the
// final answer fallback scan.

#include "bigmas/executor.hpp"

namespace bigmas {

std::string termination_name(Termination t) {
    switch (t) {
    case Termination::Sink: return "sink";
    case Termination::NodeFailureToSink: return "node-failure-to-sink";
    case Termination::BudgetExhausted: return "budget-exhausted";
    }
    return "sink";
}

Json StepRecord::to_json() const {
    Json parse_json{{"ok", parse.ok},
                    {"strategy", parse.strategy_used},
                    {"diagnostics", parse.diagnostics}};
    return Json{{"index", index},
                {"node", node},
                {"responses", responses},
                {"parse", parse_json},
                {"corrections", corrections_used},
                {"validation", Json{{"pass", validation.pass},
                                    {"code", validation.code},
                                    {"message", validation.message}}},
                {"applied", applied ? applied->to_json() : Json(nullptr)},
                {"routing", routing ? routing->to_json() : Json(nullptr)},
                {"pre", pre_snapshot},
                {"post", post_snapshot},
                {"calls", calls}};
}

std::string node_system_prompt(const NodeSpec& node, const DesignOutput& design,
                               bool is_sink) {
    std::string out =
        "You are agent '" + node.id + "' in a multi-agent system.\n"
        "Role: " + node.role + "\n";
    if (!node.responsibilities.empty())
        out += "Your responsibilities: " + node.responsibilities + "\n";
    out += "Shared contract:\n" + design.contract + "\n\n";
    out +=
        "You act by emitting exactly one write instruction for the shared workspace: "
        "a JSON object with fields target_path, action, payload.\n"
        "- target_path: dot path of an existing field in the work area";
    if (is_sink)
        out += ", or \"answer\" to set the final answer (you are the sink, so the "
               "answer slot is yours to write)";
    out += "\n"
        "- action: append (target must be a list) | update (target must be a dict, "
        "payload an object to merge) | replace\n"
        "- payload: the non-empty content to write\n"
        "Reply with one fenced json block containing only that object.";
    return out;
}

std::string node_user_prompt(const Workspace& ws, const NodeSpec& node, bool is_sink,
                             const std::string& prior_error) {
    std::string out = "Problem:\n" + ws.ctx + "\nWorkspace now:\n" +
                      serialize_workspace(ws) + "\n";
    if (is_sink)
        out += "\nYou are the sink node: write the final answer to target_path "
               "\"answer\" with action replace.\n";
    if (!prior_error.empty())
        out += "\nYour previous instruction failed validation.\n" + prior_error +
               "\nEmit a corrected write instruction that satisfies the rules.\n";
    out += "\nEmit your write instruction now.";
    return out;
}

namespace {

std::string format_error(const ValidationResult& v) {
    return "Error code: " + v.code + "\nDetail: " + v.message;
}

std::string join_diagnostics(const std::vector<std::string>& diags) {
    std::string out;
    for (std::size_t i = 0; i < diags.size(); ++i) out += (i ? "; " : "") + diags[i];
    return out;
}

/// Depth-first candidate scan used by fallback_resolve.
void collect_candidates(const Json& node, std::vector<std::string>& out) {
    if (node.is_string()) {
        if (!node.get<std::string>().empty()) out.push_back(node.get<std::string>());
        return;
    }
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) collect_candidates(value, out);
        return;
    }
    if (node.is_array()) {
        for (const auto& item : node) {
            if (item.is_array()) out.push_back(item.dump()); // e.g. a move list
            else collect_candidates(item, out);
        }
    }
}

/// Text carried by an applied payload, for the most-recent-output rule.
std::optional<std::string> payload_text(const Json& payload) {
    if (payload.is_string() && !payload.get<std::string>().empty())
        return payload.get<std::string>();
    if (payload.is_object()) {
        for (const char* key : {"expr", "answer", "solution", "moves"})
            if (payload.contains(key) && payload[key].is_string() &&
                !payload[key].get<std::string>().empty())
                return payload[key].get<std::string>();
    }
    if (payload.is_array() && !payload.empty()) return payload.dump();
    return std::nullopt;
}

} // namespace

FallbackOutcome fallback_resolve(Workspace& ws, const std::vector<StepRecord>& history,
                                 const tasks::Instance& instance) {
    std::vector<std::string> candidates;
    collect_candidates(ws.work, candidates);

    for (const auto& c : candidates) {
        if (tasks::verify(instance, c).correct) {
            ws.ans = c;
            return {c, "verified-candidate"};
        }
    }
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (!it->applied) continue;
        if (auto text = payload_text(it->applied->payload)) {
            ws.ans = *text;
            return {*text, "recent-output"};
        }
    }
    ws.ans = kEmptyAnswerMarker;
    return {kEmptyAnswerMarker, "empty-marker"};
}

ExecutionResult run(const tasks::Instance& instance, const DesignOutput& design,
                    const RunConfig& config, ModelBackend& backend, UsageLedger& ledger) {
    if (config.t_max < 1 || config.r_max < 1)
        throw std::invalid_argument("run: t_max and r_max must be at least 1");

    ExecutionResult result;
    Workspace ws = init_workspace(instance.constraints, design.work_schema);

    // Per-call usage is the ledger's total delta around each call; runs
    // own their ledger, so nothing else moves it meanwhile.
    auto tracked = [&](Phase phase, const std::string& system, const std::string& user,
                       int max_tokens, Json& calls) {
        Usage before = ledger.total();
        std::string reply = backend.generate(phase, system, user, max_tokens);
        Usage after = ledger.total();
        calls.push_back(Json{{"phase", phase_name(phase)},
                             {"prompt_tokens", after.prompt_tokens - before.prompt_tokens},
                             {"completion_tokens",
                              after.completion_tokens - before.completion_tokens}});
        return reply;
    };

    std::string current = design.graph.source;
    bool arrived_via_failure = false;
    int t = 0;

    while (true) {
        if (t >= config.t_max) {
            result.termination = Termination::BudgetExhausted;
            break;
        }
        const NodeSpec* node = design.graph.find(current);
        const bool is_sink = current == design.graph.sink;

        StepRecord step;
        step.index = t;
        step.node = current;
        step.pre_snapshot = serialize_workspace(ws);

        const std::string system = node_system_prompt(*node, design, is_sink);

        // Initial call, then the validate/correct loop. The attempt under
        // evaluation is either reply text or a gateway failure.
        std::optional<std::string> attempt;
        std::string attempt_error;
        try {
            attempt = tracked(Phase::NodeExecution, system,
                              node_user_prompt(ws, *node, is_sink, ""),
                              config.max_tokens_node, step.calls);
            step.responses.push_back(*attempt);
        } catch (const GatewayError& e) {
            attempt_error = e.what();
        }

        for (int r = 0; r < config.r_max; ++r) {
            if (attempt) {
                step.parse = parse_write_instruction(*attempt);
                if (step.parse.ok) {
                    step.validation =
                        validate_write(ws, step.parse.instruction, is_sink);
                } else {
                    step.validation = {false, "parse-error",
                                       join_diagnostics(step.parse.diagnostics)};
                }
            } else {
                step.validation = {false, "gateway-error", attempt_error};
            }
            if (step.validation.pass) break;

            step.corrections_used += 1;
            try {
                attempt = tracked(
                    Phase::NodeExecution, system,
                    node_user_prompt(ws, *node, is_sink, format_error(step.validation)),
                    config.max_tokens_node, step.calls);
                step.responses.push_back(*attempt);
            } catch (const GatewayError& e) {
                attempt = std::nullopt;
                attempt_error = e.what();
            }
        }

        if (step.validation.pass) {
            apply_write(ws, step.parse.instruction, step.validation);
            step.applied = step.parse.instruction;
        }
        step.post_snapshot = serialize_workspace(ws);
        // Bookkeeping comes after the snapshot so a failed write leaves
        // pre == post byte-identical.
        note_step_completed(ws, current, step.corrections_used);
        t += 1;

        const bool passed = step.validation.pass;
        result.steps.push_back(std::move(step));

        if (is_sink) {
            result.termination =
                arrived_via_failure ? Termination::NodeFailureToSink : Termination::Sink;
            break;
        }
        if (passed) {
            std::vector<HistoryDigestEntry> digest;
            std::size_t from = result.steps.size() > 5 ? result.steps.size() - 5 : 0;
            for (std::size_t i = from; i < result.steps.size(); ++i) {
                const StepRecord& s = result.steps[i];
                digest.push_back({s.node,
                                  s.applied ? write_action_name(s.applied->action) : "-",
                                  s.applied ? s.applied->path_text() : "-",
                                  s.validation.pass ? "pass" : s.validation.code});
            }
            Usage before = ledger.total();
            RoutingDecision decision =
                route(ws, digest, current, design.graph, backend, config);
            Usage after = ledger.total();
            if (after.calls > before.calls)
                result.steps.back().calls.push_back(
                    Json{{"phase", phase_name(Phase::Routing)},
                         {"prompt_tokens", after.prompt_tokens - before.prompt_tokens},
                         {"completion_tokens",
                          after.completion_tokens - before.completion_tokens}});
            result.route_invocations += 1;
            if (decision.branching) result.routing_decisions += 1;
            current = decision.next;
            arrived_via_failure = false;
            result.steps.back().routing = std::move(decision);
        } else {
            current = design.graph.sink;
            arrived_via_failure = true;
        }
    }

    if (answer_empty(ws)) {
        FallbackOutcome fb = fallback_resolve(ws, result.steps, instance);
        result.fallback_answer = true;
        result.fallback_source = fb.source;
    }
    result.answer = answer_text(ws);
    result.workspace = std::move(ws);
    return result;
}

SolveResult solve(const tasks::Instance& instance, const RunConfig& config,
                  ModelBackend& backend, UsageLedger& ledger) {
    SolveResult out;
    out.design = design(instance, backend, config);
    out.execution = run(instance, out.design.design, config, backend, ledger);
    return out;
}

} // namespace bigmas
