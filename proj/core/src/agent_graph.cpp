// Agent graph structure, validation, and role classification.

#include "bigmas/agent_graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "bigmas/text_scan.hpp"

namespace bigmas {

const NodeSpec* AgentGraph::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

GraphValidation validate_graph(const AgentGraph& g) {
    auto fail = [](std::string rule, std::string detail) {
        return GraphValidation{false, std::move(rule), std::move(detail)};
    };

    std::set<std::string> ids;
    for (const auto& n : g.nodes) {
        if (n.id.empty()) return fail("empty-node-id", "node with empty id");
        if (!ids.insert(n.id).second)
            return fail("duplicate-node-id", "duplicate node id '" + n.id + "'");
        if (trim_copy(n.role).empty())
            return fail("empty-role", "node '" + n.id + "' has an empty role");
    }
    if (g.source.empty() || ids.count(g.source) == 0)
        return fail("missing-source", "source '" + g.source + "' is not a declared node");
    if (g.sink.empty() || ids.count(g.sink) == 0)
        return fail("missing-sink", "sink '" + g.sink + "' is not a declared node");
    if (g.source == g.sink)
        return fail("source-equals-sink", "source and sink must be distinct nodes");
    if (static_cast<int>(g.nodes.size()) > kMaxNodes)
        return fail("node-limit",
                    "graph has " + std::to_string(g.nodes.size()) + " nodes, limit is " +
                        std::to_string(kMaxNodes));

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [from, to] : g.edges) {
        if (ids.count(from) == 0 || ids.count(to) == 0)
            return fail("unknown-edge-endpoint", "edge " + from + " -> " + to +
                                                     " references an undeclared node");
        if (!seen.insert({from, to}).second)
            return fail("duplicate-edge", "edge " + from + " -> " + to + " declared twice");
        if (from == g.sink && to == g.sink)
            return fail("sink-self-loop", "sink node loops to itself");
    }

    // Sink must be reachable from source so every run can terminate.
    std::set<std::string> visited{g.source};
    std::deque<std::string> frontier{g.source};
    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.pop_front();
        if (cur == g.sink) return GraphValidation{true, "", ""};
        for (const auto& [from, to] : g.edges)
            if (from == cur && visited.insert(to).second) frontier.push_back(to);
    }
    return fail("unreachable-sink", "no path from '" + g.source + "' to '" + g.sink + "'");
}

std::vector<std::string> successors(const AgentGraph& g, const std::string& id) {
    if (!g.contains(id)) throw std::invalid_argument("successors: unknown node '" + id + "'");
    std::vector<std::string> out;
    for (const auto& [from, to] : g.edges)
        if (from == id) out.push_back(to);
    return out;
}

RoleCategory classify_role(const std::string& descriptor) {
    std::string d = to_lower_copy(descriptor);
    auto has = [&](const char* stem) { return d.find(stem) != std::string::npos; };

    if (has("generat") || has("propos") || has("enumerat")) return RoleCategory::Generator;
    if (has("valid") || has("verif") || has("check")) return RoleCategory::Validator;
    if (has("format") || has("extract") || has("final") || has("answer"))
        return RoleCategory::Formatter;
    if (has("analy") || has("select") || has("plan") || has("strateg"))
        return RoleCategory::Analyzer;
    if (has("optim") || has("refin") || has("improv")) return RoleCategory::Optimizer;
    return RoleCategory::Other;
}

std::string role_category_name(RoleCategory c) {
    switch (c) {
    case RoleCategory::Generator: return "generator";
    case RoleCategory::Validator: return "validator";
    case RoleCategory::Formatter: return "formatter";
    case RoleCategory::Analyzer: return "analyzer";
    case RoleCategory::Optimizer: return "optimizer";
    case RoleCategory::Other: return "other";
    }
    return "other";
}

Json graph_to_json(const AgentGraph& g) {
    Json nodes = Json::array();
    for (const auto& n : g.nodes)
        nodes.push_back({{"id", n.id}, {"role", n.role}, {"responsibilities", n.responsibilities}});
    Json edges = Json::array();
    for (const auto& [from, to] : g.edges) edges.push_back(Json::array({from, to}));
    return Json{{"nodes", nodes}, {"edges", edges}, {"source", g.source}, {"sink", g.sink}};
}

GraphParse graph_from_json(const Json& doc) {
    auto fail = [](std::string err) { return GraphParse{false, {}, std::move(err)}; };
    if (!doc.is_object()) return fail("graph document is not a JSON object");
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) return fail("missing 'nodes' array");
    if (!doc.contains("edges") || !doc["edges"].is_array()) return fail("missing 'edges' array");
    if (!doc.contains("source") || !doc["source"].is_string())
        return fail("missing 'source' string");
    if (!doc.contains("sink") || !doc["sink"].is_string()) return fail("missing 'sink' string");

    AgentGraph g;
    for (const auto& item : doc["nodes"]) {
        if (!item.is_object() || !item.contains("id") || !item["id"].is_string())
            return fail("node entry without a string 'id'");
        NodeSpec n;
        n.id = item["id"].get<std::string>();
        if (item.contains("role") && item["role"].is_string())
            n.role = item["role"].get<std::string>();
        if (item.contains("responsibilities") && item["responsibilities"].is_string())
            n.responsibilities = item["responsibilities"].get<std::string>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& item : doc["edges"]) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string())
            return fail("edge entry is not a [from, to] string pair");
        g.edges.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
    }
    g.source = doc["source"].get<std::string>();
    g.sink = doc["sink"].get<std::string>();
    return GraphParse{true, std::move(g), ""};
}

} // namespace bigmas
