// Recovers structured write instructions from free-form model replies.

#include "bigmas/instruction_parser.hpp"

#include <optional>

#include "bigmas/text_scan.hpp"

namespace bigmas {
namespace {

bool split_dot_path(const std::string& text, std::vector<std::string>& out) {
    out.clear();
    std::string cur;
    auto flush = [&]() {
        std::string seg = trim_copy(cur);
        cur.clear();
        if (seg.empty()) return false;
        out.push_back(std::move(seg));
        return true;
    };
    for (char c : text) {
        if (c == '.') {
            if (!flush()) return false;
        } else {
            cur += c;
        }
    }
    return flush();
}

/// Json object -> instruction; `why` explains the first missing piece.
bool instruction_from_object(const Json& obj, WriteInstruction& out, std::string& why) {
    const Json* path_field = nullptr;
    if (obj.contains("target_path")) path_field = &obj["target_path"];
    else if (obj.contains("path")) path_field = &obj["path"];
    if (!path_field) {
        why = "no 'target_path' key";
        return false;
    }

    std::vector<std::string> path;
    if (path_field->is_string()) {
        if (!split_dot_path(path_field->get<std::string>(), path)) {
            why = "target path has an empty segment";
            return false;
        }
    } else if (path_field->is_array()) {
        for (const auto& seg : *path_field) {
            if (!seg.is_string() || seg.get<std::string>().empty()) {
                why = "target path array must hold non-empty strings";
                return false;
            }
            path.push_back(seg.get<std::string>());
        }
        if (path.empty()) {
            why = "target path array is empty";
            return false;
        }
    } else {
        why = "'target_path' is neither a string nor an array";
        return false;
    }

    if (!obj.contains("action") || !obj["action"].is_string()) {
        why = "no string 'action' key";
        return false;
    }
    WriteAction action;
    if (!parse_write_action(obj["action"].get<std::string>(), action)) {
        why = "unknown action '" + obj["action"].get<std::string>() + "'";
        return false;
    }

    out.path = std::move(path);
    out.action = action;
    out.payload = obj.contains("payload") ? obj["payload"] : Json(nullptr);
    return true;
}

std::optional<WriteInstruction> try_whole_object(const std::string& text, std::string& why) {
    auto obj = parse_whole_object(text);
    if (!obj) {
        why = "reply is not a single JSON object";
        return std::nullopt;
    }
    WriteInstruction instr;
    if (!instruction_from_object(*obj, instr, why)) return std::nullopt;
    return instr;
}

std::optional<WriteInstruction> try_last_fenced(const std::string& text, std::string& why) {
    auto blocks = fenced_blocks(text);
    if (blocks.empty()) {
        why = "no fenced code block";
        return std::nullopt;
    }
    Json obj = Json::parse(blocks.back(), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        why = "last fenced block is not a JSON object";
        return std::nullopt;
    }
    WriteInstruction instr;
    if (!instruction_from_object(obj, instr, why)) {
        why = "last fenced block: " + why;
        return std::nullopt;
    }
    return instr;
}

std::optional<WriteInstruction> try_embedded_object(const std::string& text, std::string& why) {
    auto spans = balanced_objects(text);
    // Prefer the last candidate that actually mentions an action; the reply
    // may contain unrelated JSON (examples, workspace echoes) before it.
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
        Json obj = Json::parse(*it, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("action")) continue;
        WriteInstruction instr;
        if (instruction_from_object(obj, instr, why)) return instr;
        why = "embedded object: " + why;
        return std::nullopt;
    }
    why = "no embedded JSON object with an 'action' key";
    return std::nullopt;
}

/// `target_path: x`, `action: y`, `payload: <rest of reply>` header lines.
std::optional<WriteInstruction> try_header_lines(const std::string& text, std::string& why) {
    std::optional<std::string> path_text, action_text, payload_text;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
        std::string lowered = to_lower_copy(trim_copy(line));

        auto value_after_colon = [&line] {
            std::size_t colon = line.find(':');
            return trim_copy(line.substr(colon + 1));
        };
        if (lowered.rfind("target_path:", 0) == 0) {
            path_text = value_after_colon();
        } else if (lowered.rfind("action:", 0) == 0) {
            action_text = value_after_colon();
        } else if (lowered.rfind("payload:", 0) == 0) {
            // Payload spans from here to the end so multi-line JSON survives.
            std::string rest = value_after_colon();
            if (eol != std::string::npos) {
                std::string tail = text.substr(eol + 1);
                if (!trim_copy(tail).empty())
                    rest = trim_copy(rest.empty() ? tail : rest + "\n" + tail);
            }
            payload_text = rest;
            break;
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }

    if (!path_text || !action_text || !payload_text) {
        why = "header lines incomplete (need target_path, action, payload)";
        return std::nullopt;
    }
    WriteInstruction instr;
    if (!split_dot_path(*path_text, instr.path)) {
        why = "header target path has an empty segment";
        return std::nullopt;
    }
    if (!parse_write_action(*action_text, instr.action)) {
        why = "header action '" + *action_text + "' is not append/update/replace";
        return std::nullopt;
    }
    Json payload = Json::parse(*payload_text, nullptr, false);
    instr.payload = payload.is_discarded() ? Json(*payload_text) : payload;
    return instr;
}

} // namespace

ParseOutcome parse_write_instruction(const std::string& text) {
    ParseOutcome outcome;
    using Strategy =
        std::optional<WriteInstruction> (*)(const std::string&, std::string&);
    const Strategy strategies[] = {try_whole_object, try_last_fenced, try_embedded_object,
                                   try_header_lines};

    for (int i = 0; i < 4; ++i) {
        std::string why;
        if (auto instr = strategies[i](text, why)) {
            outcome.ok = true;
            outcome.instruction = std::move(*instr);
            outcome.strategy_used = i + 1;
            return outcome;
        }
        outcome.diagnostics.push_back("strategy " + std::to_string(i + 1) + ": " + why);
    }
    return outcome;
}

} // namespace bigmas
