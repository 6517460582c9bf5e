// Design phase: one model call producing (graph, work schema, contract),
// with strict parsing, one retry, and a deterministic fallback template.

#include "bigmas/graph_designer.hpp"

#include "bigmas/text_scan.hpp"
#include "bigmas/workspace.hpp"

namespace bigmas {

Json DesignOutput::to_json() const {
    Json doc = graph_to_json(graph);
    doc["work_schema"] = work_schema;
    doc["contract"] = contract;
    return doc;
}

namespace {

/// Design documents are JSON objects with a "nodes" key; tries the whole
/// reply, then the last fenced block, then the last embedded object.
bool extract_design_document(const std::string& text, Json& out) {
    if (auto whole = parse_whole_object(text); whole && whole->contains("nodes")) {
        out = std::move(*whole);
        return true;
    }
    auto blocks = fenced_blocks(text);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        Json doc = Json::parse(*it, nullptr, false);
        if (!doc.is_discarded() && doc.is_object() && doc.contains("nodes")) {
            out = std::move(doc);
            return true;
        }
    }
    if (auto obj = last_object_with_key(text, "nodes")) {
        out = std::move(*obj);
        return true;
    }
    return false;
}

bool schema_keys_ok(const Json& schema, std::string& detail) {
    for (const auto& [key, value] : schema.items()) {
        if (key.find('.') != std::string::npos) {
            detail = "schema key '" + key + "' contains '.', the path separator";
            return false;
        }
        if (value.is_object() && !schema_keys_ok(value, detail)) return false;
    }
    return true;
}

} // namespace

DesignParse parse_design(const std::string& text) {
    auto fail = [](std::string code, std::string detail) {
        return DesignParse{false, {}, std::move(code), std::move(detail)};
    };

    Json doc;
    if (!extract_design_document(text, doc))
        return fail("no-document-found", "reply contains no design document");

    GraphParse gp = graph_from_json(doc);
    if (!gp.ok) return fail("invalid-graph", gp.error);
    GraphValidation gv = validate_graph(gp.graph);
    if (!gv.pass) return fail("invalid-graph", gv.rule + ": " + gv.detail);

    if (!doc.contains("work_schema") || !doc["work_schema"].is_object())
        return fail("invalid-graph", "missing 'work_schema' object");
    const Json& schema = doc["work_schema"];
    if (schema.contains(kAnswerPathSegment))
        return fail("schema-shadows-answer-path",
                    "work_schema declares the reserved '" +
                        std::string(kAnswerPathSegment) + "' field");
    std::string key_detail;
    if (!schema_keys_ok(schema, key_detail)) return fail("invalid-graph", key_detail);

    if (!doc.contains("contract") || !doc["contract"].is_string())
        return fail("invalid-graph", "missing 'contract' text");
    std::string contract = doc["contract"].get<std::string>();
    for (const auto& node : gp.graph.nodes)
        if (contract.find(node.id) == std::string::npos)
            return fail("invalid-graph", "contract never mentions node '" + node.id + "'");

    DesignParse out;
    out.ok = true;
    out.design.graph = std::move(gp.graph);
    out.design.work_schema = schema;
    out.design.contract = std::move(contract);
    return out;
}

DesignOutput default_design(tasks::TaskKind kind) {
    DesignOutput d;
    d.graph.nodes = {
        {"generator", "Generator: propose candidate solutions",
         "append one candidate per visit to the candidates list"},
        {"validator", "Validator: check candidates against the task constraints",
         "record a pass/fail entry per candidate in the validated map"},
        {"formatter", "Formatter: produce the final answer",
         "write the best validated candidate to the answer slot"},
    };
    d.graph.edges = {{"generator", "validator"}, {"validator", "formatter"}};
    d.graph.source = "generator";
    d.graph.sink = "formatter";
    d.work_schema = Json{{"candidates", Json::array()}, {"validated", Json::object()}};

    switch (kind) {
    case tasks::TaskKind::Game24:
        d.contract =
            "generator appends candidate arithmetic expressions to candidates "
            "(action append, one expression string per write). validator checks each "
            "candidate for the exact target value and for using every given number "
            "exactly once, recording results in validated (action update, keys are the "
            "candidate expressions). formatter writes the one verified expression to "
            "answer (action replace).";
        break;
    case tasks::TaskKind::SixFives:
        d.contract =
            "generator appends candidate expressions built from exactly six 5s to "
            "candidates (action append, one expression string per write). validator "
            "checks digit count and exact value, recording results in validated "
            "(action update). formatter writes the one verified expression to answer "
            "(action replace).";
        break;
    case tasks::TaskKind::TowerOfLondon:
        d.work_schema["moves"] = Json::array();
        d.contract =
            "generator appends candidate move sequences (JSON lists of [from,to] peg "
            "pairs) to candidates and may stage working sequences in moves (action "
            "append). validator simulates each candidate from the initial "
            "configuration and records legality and goal-reaching in validated "
            "(action update). formatter writes the verified move list to answer "
            "(action replace).";
        break;
    }
    return d;
}

std::string design_system_prompt() {
    return
        "You design small directed graphs of specialist agents that solve one "
        "problem by reading and writing a shared JSON workspace.\n"
        "Reply with exactly one fenced json block containing an object with these "
        "fields:\n"
        "- nodes: list of {id, role, responsibilities}; ids are short snake_case "
        "tokens, roles start with a category word such as Generator, Validator, "
        "Analyzer, Optimizer or Formatter\n"
        "- edges: list of [from, to] id pairs (cycles allowed)\n"
        "- source: id of the entry node; sink: id of the node that writes the final "
        "answer (source != sink)\n"
        "- work_schema: JSON object template for the shared scratch space; field "
        "names must not contain '.' and must not be named 'answer'\n"
        "- contract: one paragraph naming every node id and what it reads/writes\n"
        "Limits: at most 10 nodes; the sink must be reachable from the source.\n"
        "\n"
        "Example shapes (roles only):\n"
        "```json\n"
        "{\"nodes\":[{\"id\":\"generator\",\"role\":\"Generator: propose candidates\","
        "\"responsibilities\":\"append candidates\"},{\"id\":\"validator\",\"role\":"
        "\"Validator: verify candidates\",\"responsibilities\":\"record checks\"},"
        "{\"id\":\"formatter\",\"role\":\"Formatter: final answer\",\"responsibilities\":"
        "\"write answer\"}],\"edges\":[[\"generator\",\"validator\"],[\"validator\","
        "\"formatter\"]],\"source\":\"generator\",\"sink\":\"formatter\","
        "\"work_schema\":{\"candidates\":[],\"validated\":{}},\"contract\":\"generator "
        "appends to candidates; validator records results in validated; formatter "
        "writes the answer.\"}\n"
        "```\n"
        "```json\n"
        "{\"nodes\":[{\"id\":\"analyzer\",\"role\":\"Analyzer: plan the search\","
        "\"responsibilities\":\"write a plan\"},{\"id\":\"generator\",\"role\":"
        "\"Generator: enumerate options\",\"responsibilities\":\"append options\"},"
        "{\"id\":\"validator\",\"role\":\"Validator: check options\","
        "\"responsibilities\":\"record verdicts\"},{\"id\":\"formatter\",\"role\":"
        "\"Formatter: final answer\",\"responsibilities\":\"write answer\"}],"
        "\"edges\":[[\"analyzer\",\"generator\"],[\"generator\",\"validator\"],"
        "[\"validator\",\"generator\"],[\"validator\",\"formatter\"]],"
        "\"source\":\"analyzer\",\"sink\":\"formatter\",\"work_schema\":{\"plan\":\"\","
        "\"options\":[],\"verdicts\":{}},\"contract\":\"analyzer writes plan; generator "
        "appends options; validator records verdicts and may loop back to generator; "
        "formatter writes the answer.\"}\n"
        "```\n"
        "```json\n"
        "{\"nodes\":[{\"id\":\"planner\",\"role\":\"Analyzer: plan move order\","
        "\"responsibilities\":\"stage steps\"},{\"id\":\"simulator\",\"role\":"
        "\"Validator: simulate moves\",\"responsibilities\":\"record outcomes\"},"
        "{\"id\":\"formatter\",\"role\":\"Formatter: final answer\","
        "\"responsibilities\":\"write answer\"}],\"edges\":[[\"planner\",\"simulator\"],"
        "[\"simulator\",\"planner\"],[\"simulator\",\"formatter\"]],"
        "\"source\":\"planner\",\"sink\":\"formatter\",\"work_schema\":{\"moves\":[],"
        "\"outcomes\":{}},\"contract\":\"planner stages steps in moves; simulator "
        "records outcomes and loops back to planner until done; formatter writes the "
        "answer.\"}\n"
        "```";
}

std::string design_user_prompt(const tasks::Instance& instance) {
    return tasks::render_context(instance) +
           "\nDesign the agent graph for this problem. Reply with exactly one fenced "
           "json block in the required format.";
}

DesignResult design(const tasks::Instance& instance, ModelBackend& backend,
                    const RunConfig& config) {
    DesignResult out;
    const std::string system = design_system_prompt();
    const std::string user = design_user_prompt(instance);

    std::string prior_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string prompt = user;
        if (attempt == 1)
            prompt += "\n\nYour previous reply could not be used: " + prior_error +
                      ". Reply again with exactly one fenced json block.";
        std::string response =
            backend.generate(Phase::Design, system, prompt, config.max_tokens_design);
        DesignParse parsed = parse_design(response);
        out.attempts.push_back({system, prompt, response, parsed.ok,
                                parsed.ok ? "" : parsed.code + ": " + parsed.detail});
        if (parsed.ok) {
            out.design = std::move(parsed.design);
            return out;
        }
        prior_error = parsed.code + " (" + parsed.detail + ")";
    }

    out.design = default_design(instance.kind);
    out.used_fallback = true;
    return out;
}

} // namespace bigmas
