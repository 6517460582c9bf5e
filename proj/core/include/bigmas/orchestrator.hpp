#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bigmas/agent_graph.hpp"
#include "bigmas/model_gateway.hpp"
#include "bigmas/run_config.hpp"
#include "bigmas/workspace.hpp"

namespace bigmas {

/// One executed step, condensed for the routing prompt.
struct HistoryDigestEntry {
    std::string node;
    std::string action; // applied action name, "-" when nothing was applied
    std::string path;   // target path text, "-" when nothing was applied
    std::string status; // "pass" or the final failure code
};

enum class RouteMode { Deterministic, Model, Fallback };

std::string route_mode_name(RouteMode m);

struct RoutingDecision {
    std::string next;
    RouteMode mode = RouteMode::Deterministic;
    std::string rationale; // raw model reply when a routing call was made
    bool branching = false; // true iff the node had more than one successor

    Json to_json() const;
};

/// Picks the successor id named in the reply: an exact trimmed line wins,
/// otherwise the candidate whose last whole-token occurrence is rightmost;
/// nullopt when no candidate id appears.
std::optional<std::string> parse_route_choice(const std::string& text,
                                              const std::vector<std::string>& candidates);

/// Next node after `current`. A unique successor routes deterministically
/// with no model call; several successors trigger one routing call whose
/// prompt holds the serialized workspace, the recent-step digest, and the
/// candidate ids. Unmatched replies and gateway failures fall back to the
/// first declared successor; no successors at all fall back to the sink.
RoutingDecision route(const Workspace& ws, const std::vector<HistoryDigestEntry>& digest,
                      const std::string& current, const AgentGraph& graph,
                      ModelBackend& backend, const RunConfig& config);

/// Routing prompt pair (exposed for prompt tests).
std::string routing_system_prompt();
std::string routing_user_prompt(const Workspace& ws,
                                const std::vector<HistoryDigestEntry>& digest,
                                const std::string& current,
                                const std::vector<std::string>& candidates);

} // namespace bigmas
