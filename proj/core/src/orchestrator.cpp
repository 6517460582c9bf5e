// Global routing: deterministic on unique successors, model-conditioned on
// the full workspace at branches, with a first-successor fallback.

#include "bigmas/orchestrator.hpp"

#include "bigmas/text_scan.hpp"

namespace bigmas {

std::string route_mode_name(RouteMode m) {
    switch (m) {
    case RouteMode::Deterministic: return "deterministic";
    case RouteMode::Model: return "model";
    case RouteMode::Fallback: return "fallback";
    }
    return "fallback";
}

Json RoutingDecision::to_json() const {
    return Json{{"next", next},
                {"mode", route_mode_name(mode)},
                {"rationale", rationale},
                {"branching", branching}};
}

std::optional<std::string> parse_route_choice(const std::string& text,
                                              const std::vector<std::string>& candidates) {
    // Exact trimmed line first: a reply like "formatter" is unambiguous
    // even when the rationale above it mentions other nodes.
    std::optional<std::string> exact;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line =
            trim_copy(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
        for (const auto& c : candidates)
            if (line == c) exact = c; // keep the last exact line
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    if (exact) return exact;

    std::optional<std::string> best;
    std::size_t best_pos = 0;
    for (const auto& c : candidates) {
        if (auto at = last_whole_token_pos(text, c)) {
            if (!best || *at >= best_pos) {
                best = c;
                best_pos = *at;
            }
        }
    }
    return best;
}

std::string routing_system_prompt() {
    return "You are the orchestrator of a small multi-agent system. Agents share the "
           "JSON workspace shown to you. Pick which agent should run next so the run "
           "converges on a verified answer without wasted steps. Reply with exactly "
           "one node id from the candidate list, on its own line, nothing else.";
}

std::string routing_user_prompt(const Workspace& ws,
                                const std::vector<HistoryDigestEntry>& digest,
                                const std::string& current,
                                const std::vector<std::string>& candidates) {
    std::string ids;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        ids += (i ? ", " : "") + candidates[i];

    std::string hist;
    if (digest.empty()) {
        hist = "(none)\n";
    } else {
        for (const auto& e : digest)
            hist += "- node=" + e.node + " action=" + e.action + " path=" + e.path +
                    " status=" + e.status + "\n";
    }

    return "Workspace:\n" + serialize_workspace(ws) +
           "\n\nRecent steps (oldest first):\n" + hist +
           "\nJust executed: " + current +
           "\nCandidate next nodes: " + ids +
           "\nWhich node runs next? Reply with exactly one of: " + ids;
}

RoutingDecision route(const Workspace& ws, const std::vector<HistoryDigestEntry>& digest,
                      const std::string& current, const AgentGraph& graph,
                      ModelBackend& backend, const RunConfig& config) {
    std::vector<std::string> succ = successors(graph, current);
    if (succ.empty())
        return {graph.sink, RouteMode::Fallback, "", false};
    if (succ.size() == 1)
        return {succ[0], RouteMode::Deterministic, "", false};

    try {
        std::string reply = backend.generate(Phase::Routing, routing_system_prompt(),
                                             routing_user_prompt(ws, digest, current, succ),
                                             config.max_tokens_routing);
        if (auto choice = parse_route_choice(reply, succ))
            return {*choice, RouteMode::Model, reply, true};
        return {succ[0], RouteMode::Fallback, reply, true};
    } catch (const GatewayError&) {
        return {succ[0], RouteMode::Fallback, "", true};
    }
}

} // namespace bigmas
