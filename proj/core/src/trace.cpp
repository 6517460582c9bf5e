#include "bigmas/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bigmas {

namespace {

std::vector<std::string> split_path(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

bool instruction_from_record(const Json& doc, WriteInstruction& out, std::string& error) {
    if (!doc.is_object() || !doc.contains("target_path") || !doc.contains("action")) {
        error = "applied write is missing target_path or action";
        return false;
    }
    if (!doc["target_path"].is_string() || !doc["action"].is_string()) {
        error = "applied write has non-string target_path or action";
        return false;
    }
    out.path = split_path(doc["target_path"].get<std::string>());
    if (!parse_write_action(doc["action"].get<std::string>(), out.action)) {
        error = "unknown action '" + doc["action"].get<std::string>() + "'";
        return false;
    }
    out.payload = doc.contains("payload") ? doc["payload"] : Json(nullptr);
    return true;
}

} // namespace

Json run_header_record(const tasks::Instance& instance, const std::string& method,
                       const RunConfig& config, const DesignResult* design) {
    Json design_json(nullptr);
    if (design) {
        Json attempts = Json::array();
        for (const auto& a : design->attempts)
            attempts.push_back(Json{{"system", a.system_prompt},
                                    {"user", a.user_prompt},
                                    {"response", a.response},
                                    {"accepted", a.accepted},
                                    {"error", a.error}});
        design_json = Json{{"design", design->design.to_json()},
                           {"used_fallback", design->used_fallback},
                           {"attempts", attempts}};
    }
    return Json{{"type", "header"},
                {"method", method},
                {"instance", tasks::instance_to_json(instance)},
                {"config", run_config_to_json(config)},
                {"design", design_json}};
}

Json run_result_record(const ExecutionResult& result, const tasks::Verdict& verdict,
                       const UsageLedger& ledger) {
    Json fallback(nullptr);
    if (result.fallback_answer)
        fallback = Json{{"source", result.fallback_source}, {"answer", result.answer}};
    return Json{{"type", "result"},
                {"answer", result.answer},
                {"termination", termination_name(result.termination)},
                {"fallback", fallback},
                {"workspace", serialize_workspace(result.workspace)},
                {"route_invocations", result.route_invocations},
                {"routing_decisions", result.routing_decisions},
                {"verdict", Json{{"correct", verdict.correct}, {"reason", verdict.reason}}},
                {"usage", ledger.to_json()}};
}

std::vector<Json> build_run_trace(const tasks::Instance& instance, const RunConfig& config,
                                  const DesignResult& design, const ExecutionResult& result,
                                  const tasks::Verdict& verdict, const UsageLedger& ledger) {
    std::vector<Json> records;
    records.push_back(run_header_record(instance, "bigmas", config, &design));
    for (const auto& step : result.steps) {
        Json rec = step.to_json();
        rec["type"] = "step";
        records.push_back(std::move(rec));
    }
    records.push_back(run_result_record(result, verdict, ledger));
    return records;
}

void write_jsonl(const std::string& path, const std::vector<Json>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const auto& rec : records) out << rec.dump() << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<Json> load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<Json> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json rec = Json::parse(line, nullptr, false);
        if (rec.is_discarded())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": not valid JSON");
        records.push_back(std::move(rec));
    }
    return records;
}

ReplayOutcome replay_trace(const std::vector<Json>& records) {
    ReplayOutcome out;
    auto fail = [&out](std::string why) {
        out.ok = false;
        out.error = std::move(why);
        return out;
    };

    const Json* header = nullptr;
    const Json* result = nullptr;
    std::vector<const Json*> steps;
    for (const auto& rec : records) {
        if (!rec.is_object() || !rec.contains("type") || !rec["type"].is_string())
            return fail("record without a type field");
        const std::string type = rec["type"].get<std::string>();
        if (type == "header") header = &rec;
        else if (type == "step") steps.push_back(&rec);
        else if (type == "result") result = &rec;
    }
    if (!header) return fail("no header record");
    if (!result) return fail("no result record");

    const Json& design = (*header)["design"];
    if (!design.is_object() || !design.contains("design"))
        return fail("header carries no design (nothing to replay)");
    const Json& schema = design["design"].value("work_schema", Json::object());

    tasks::Instance instance;
    std::string err;
    if (!tasks::instance_from_json((*header)["instance"], instance, err))
        return fail("bad instance in header: " + err);

    Workspace ws;
    try {
        ws = init_workspace(instance.constraints, schema);
    } catch (const std::exception& e) {
        return fail(std::string("workspace init failed: ") + e.what());
    }

    // Sink identity only matters for validation; recover it from the design.
    const std::string sink = design["design"].value("sink", std::string());

    for (const Json* step : steps) {
        const std::string node = step->value("node", std::string());
        const Json& applied = (*step)["applied"];
        if (!applied.is_null()) {
            WriteInstruction instr;
            if (!instruction_from_record(applied, instr, err))
                return fail("step " + std::to_string(step->value("index", 0)) + ": " + err);
            ValidationResult check = validate_write(ws, instr, node == sink);
            if (!check.pass)
                return fail("step " + std::to_string(step->value("index", 0)) +
                            ": recorded write no longer validates (" + check.code + ")");
            apply_write(ws, instr, check);
        }
        note_step_completed(ws, node, step->value("corrections", 0));
    }

    const Json& fallback = (*result)["fallback"];
    if (fallback.is_object())
        ws.ans = Json(fallback.value("answer", std::string()));

    out.workspace = ws;
    const std::string expected = result->value("workspace", std::string());
    if (serialize_workspace(ws) != expected)
        return fail("replayed workspace differs from the recorded final state");
    out.ok = true;
    return out;
}

} // namespace bigmas
