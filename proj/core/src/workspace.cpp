// Four-partition workspace and the validated write protocol.

#include "bigmas/workspace.hpp"

#include "bigmas/text_scan.hpp"

namespace bigmas {
namespace {

void check_schema_keys(const Json& node, bool top_level) {
    for (const auto& [key, value] : node.items()) {
        if (key.find('.') != std::string::npos)
            throw SchemaError("schema field '" + key + "' contains '.', which is reserved as the path separator");
        if (top_level && key == kAnswerPathSegment)
            throw SchemaError("schema declares a top-level 'answer' field, which shadows the answer slot");
        if (value.is_object()) check_schema_keys(value, false);
    }
}

/// Walks `work` along object keys; nullptr when any segment is absent or
/// an intermediate value is not an object.
const Json* resolve_path(const Json& work, const std::vector<std::string>& path) {
    const Json* cur = &work;
    for (const auto& seg : path) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(seg);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

Json* resolve_path_mut(Json& work, const std::vector<std::string>& path) {
    Json* cur = &work;
    for (const auto& seg : path) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(seg);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

} // namespace

Workspace init_workspace(const std::string& ctx, const Json& work_schema) {
    if (!work_schema.is_object())
        throw SchemaError("work schema must be a JSON object");
    check_schema_keys(work_schema, true);

    Workspace ws;
    ws.ctx = ctx;
    ws.work = work_schema;
    ws.sys = Json{{"step", 0}, {"corrections", 0}, {"visited", Json::array()}};
    ws.ans = nullptr;
    return ws;
}

std::string write_action_name(WriteAction a) {
    switch (a) {
    case WriteAction::Append: return "append";
    case WriteAction::Update: return "update";
    case WriteAction::Replace: return "replace";
    }
    return "replace";
}

bool parse_write_action(const std::string& text, WriteAction& out) {
    std::string t = to_lower_copy(trim_copy(text));
    if (t == "append") { out = WriteAction::Append; return true; }
    if (t == "update") { out = WriteAction::Update; return true; }
    if (t == "replace") { out = WriteAction::Replace; return true; }
    return false;
}

std::string WriteInstruction::path_text() const {
    std::string out;
    for (size_t i = 0; i < path.size(); ++i) {
        if (i) out += '.';
        out += path[i];
    }
    return out;
}

Json WriteInstruction::to_json() const {
    return Json{{"target_path", path_text()},
                {"action", write_action_name(action)},
                {"payload", payload}};
}

ValidationResult validate_write(const Workspace& ws, const WriteInstruction& instr,
                                bool writer_is_sink) {
    auto fail = [](std::string code, std::string message) {
        return ValidationResult{false, std::move(code), std::move(message)};
    };

    // (1) target must exist: a declared work field, or the answer slot
    // when the writer is the sink.
    const Json* target = nullptr;
    if (instr.targets_answer()) {
        if (!writer_is_sink)
            return fail("answer-write-by-non-sink",
                        "only the sink node may write the answer slot");
    } else {
        if (instr.path.empty())
            return fail("unknown-path", "empty target path");
        target = resolve_path(ws.work, instr.path);
        if (!target)
            return fail("unknown-path",
                        "path '" + instr.path_text() + "' does not exist in the workspace");
    }

    // (2) action must fit the target's type.
    if (instr.targets_answer()) {
        if (instr.action != WriteAction::Replace)
            return fail("type-mismatch",
                        "the answer slot only accepts 'replace', got '" +
                            write_action_name(instr.action) + "'");
    } else if (instr.action == WriteAction::Append) {
        if (!target->is_array())
            return fail("type-mismatch",
                        "'append' needs a list target, but '" + instr.path_text() +
                            "' holds " + std::string(target->type_name()));
    } else if (instr.action == WriteAction::Update) {
        if (!target->is_object())
            return fail("type-mismatch",
                        "'update' needs a dict target, but '" + instr.path_text() +
                            "' holds " + std::string(target->type_name()));
        if (!instr.payload.is_object())
            return fail("type-mismatch",
                        "'update' needs an object payload with the fields to merge");
    }

    // (3) payload must carry content.
    if (json_is_empty_value(instr.payload))
        return fail("empty-payload", "payload is empty");

    return ValidationResult{true, "", ""};
}

void apply_write(Workspace& ws, const WriteInstruction& instr,
                 const ValidationResult& validation) {
    if (!validation.pass)
        throw std::logic_error("apply_write called with a failed validation (" +
                               validation.code + ")");

    if (instr.targets_answer()) {
        ws.ans = instr.payload;
        return;
    }
    Json* target = resolve_path_mut(ws.work, instr.path);
    if (!target)
        throw std::logic_error("apply_write: path vanished after validation");

    switch (instr.action) {
    case WriteAction::Append:
        target->push_back(instr.payload);
        break;
    case WriteAction::Update:
        for (const auto& [key, value] : instr.payload.items()) (*target)[key] = value;
        break;
    case WriteAction::Replace:
        *target = instr.payload;
        break;
    }
}

void note_step_completed(Workspace& ws, const std::string& node_id, int corrections_used) {
    ws.sys["step"] = ws.sys.value("step", 0) + 1;
    ws.sys["corrections"] = ws.sys.value("corrections", 0) + corrections_used;
    ws.sys["visited"].push_back(node_id);
}

bool answer_empty(const Workspace& ws) { return json_is_empty_value(ws.ans); }

std::string answer_text(const Workspace& ws) {
    if (ws.ans.is_string()) return ws.ans.get<std::string>();
    return ws.ans.dump();
}

Json workspace_to_json(const Workspace& ws) {
    return Json{{"ctx", ws.ctx}, {"work", ws.work}, {"sys", ws.sys}, {"ans", ws.ans}};
}

Workspace workspace_from_json(const Json& doc) {
    Workspace ws;
    ws.ctx = doc.value("ctx", std::string{});
    ws.work = doc.contains("work") ? doc["work"] : Json::object();
    ws.sys = doc.contains("sys") ? doc["sys"] : Json::object();
    ws.ans = doc.contains("ans") ? doc["ans"] : Json(nullptr);
    return ws;
}

std::string serialize_workspace(const Workspace& ws) {
    // nlohmann::json keeps object keys sorted, so dump() is already canonical.
    return workspace_to_json(ws).dump(2);
}

} // namespace bigmas
