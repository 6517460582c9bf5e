#pragma once

#include <string>
#include <vector>

#include "bigmas/agent_graph.hpp"
#include "bigmas/json.hpp"
#include "bigmas/model_gateway.hpp"
#include "bigmas/run_config.hpp"
#include "bigmas/tasks.hpp"

namespace bigmas {

/// The design phase's product: the agent graph, the work-partition
/// template, and the contract text telling each node what to read and
/// write.
struct DesignOutput {
    AgentGraph graph;
    Json work_schema = Json::object();
    std::string contract;

    Json to_json() const; // graph interchange + work_schema + contract
};

struct DesignParse {
    bool ok = false;
    DesignOutput design;
    std::string code;   // no-document-found | invalid-graph | schema-shadows-answer-path
    std::string detail;
};

/// Extracts a design document from model text (whole reply, last fenced
/// block, or last embedded object with a "nodes" key) and checks it:
/// the graph must validate, the schema must be an object whose keys avoid
/// '.' and the reserved answer name, and the contract must mention every
/// node id.
DesignParse parse_design(const std::string& text);

/// Fixed generate -> validate -> format chain used when the model cannot
/// produce a valid design; identical output for identical task kind.
DesignOutput default_design(tasks::TaskKind kind);

/// One design record per attempt: the exact prompts and the raw reply.
struct DesignAttempt {
    std::string system_prompt;
    std::string user_prompt;
    std::string response;
    bool accepted = false;
    std::string error; // parse/validation failure, empty when accepted
};

struct DesignResult {
    DesignOutput design;
    bool used_fallback = false;
    std::vector<DesignAttempt> attempts;
};

/// Runs the design phase: one model call, one retry with the parse error
/// appended, then default_design. Never yields an invalid design; only
/// gateway hard failures propagate.
DesignResult design(const tasks::Instance& instance, ModelBackend& backend,
                    const RunConfig& config);

/// The prompt pair given to the designer (exposed for prompt tests).
std::string design_system_prompt();
std::string design_user_prompt(const tasks::Instance& instance);

} // namespace bigmas
