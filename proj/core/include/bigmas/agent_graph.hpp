#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bigmas/json.hpp"

namespace bigmas {

/// Hard cap on designed graphs; designs above it are rejected.
inline constexpr int kMaxNodes = 10;

struct NodeSpec {
    std::string id;
    std::string role;             // free-text role descriptor
    std::string responsibilities; // excerpt of the workspace contract for this node
};

/// Directed agent graph. Node and edge declaration order is preserved:
/// successor order is the designer's edge order and the router's fallback
/// is the first declared successor.
struct AgentGraph {
    std::vector<NodeSpec> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::string source;
    std::string sink;

    const NodeSpec* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }
};

struct GraphValidation {
    bool pass = false;
    std::string rule;   // first violated rule, e.g. "node-limit"
    std::string detail;
};

/// Structural validation: ids unique and non-empty, roles non-empty,
/// source/sink declared and distinct, node count <= kMaxNodes, edge
/// endpoints declared, no duplicate edges, no sink self-loop, sink
/// reachable from source. Cycles are allowed.
GraphValidation validate_graph(const AgentGraph& g);

/// Out-neighbors of `id` in edge declaration order. Throws
/// std::invalid_argument for an unknown node.
std::vector<std::string> successors(const AgentGraph& g, const std::string& id);

enum class RoleCategory { Generator, Validator, Formatter, Analyzer, Optimizer, Other };

/// Case-insensitive keyword classification; total over arbitrary text.
/// First matching category wins, in the order Generator, Validator,
/// Formatter, Analyzer, Optimizer.
RoleCategory classify_role(const std::string& descriptor);

std::string role_category_name(RoleCategory c);

/// Graph interchange JSON:
/// {"nodes":[{"id","role","responsibilities"}], "edges":[["a","b"],...],
///  "source":"...", "sink":"..."}
Json graph_to_json(const AgentGraph& g);

struct GraphParse {
    bool ok = false;
    AgentGraph graph;
    std::string error;
};
GraphParse graph_from_json(const Json& doc);

} // namespace bigmas
