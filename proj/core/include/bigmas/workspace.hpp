#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bigmas/json.hpp"

namespace bigmas {

/// Reserved path segment for the final-answer slot. The answer lives outside
/// `work`, so no task schema may declare a top-level field with this name.
inline constexpr const char* kAnswerPathSegment = "answer";

/// Shared state all agents read and write through the validated protocol.
/// `ctx` is the immutable problem statement, `work` the task-specific
/// scratch area, `sys` run bookkeeping, `ans` the final-answer slot
/// (null until the sink writes it).
struct Workspace {
    std::string ctx;
    Json work = Json::object();
    Json sys = Json::object();
    Json ans; // null = no answer yet
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds a workspace from the problem text and the designed work schema.
/// Throws SchemaError if the schema is not a JSON object, declares a
/// top-level "answer" field, or uses '.' inside any field name (dots are
/// the path separator and would make the field unaddressable).
Workspace init_workspace(const std::string& ctx, const Json& work_schema);

enum class WriteAction { Append, Update, Replace };

std::string write_action_name(WriteAction a);
/// Case-insensitive; returns false on unrecognized text.
bool parse_write_action(const std::string& text, WriteAction& out);

/// One proposed workspace write: a dot-path into `work` (or the answer
/// slot), an action, and a payload.
struct WriteInstruction {
    std::vector<std::string> path;
    WriteAction action = WriteAction::Replace;
    Json payload;

    bool targets_answer() const {
        return path.size() == 1 && path[0] == kAnswerPathSegment;
    }
    std::string path_text() const;
    Json to_json() const;
};

struct ValidationResult {
    bool pass = false;
    std::string code;    // stable machine-readable reason, empty on pass
    std::string message; // human-readable detail fed back to the agent
};

/// Checks, in order: (1) the path resolves inside `work`, or is the answer
/// slot and the writer is the sink; (2) the action fits the target's type
/// (append needs a list, update needs a dict and an object payload, the
/// answer slot only accepts replace); (3) the payload is non-empty.
/// Failure codes: unknown-path, answer-write-by-non-sink, type-mismatch,
/// empty-payload.
ValidationResult validate_write(const Workspace& ws, const WriteInstruction& instr,
                                bool writer_is_sink);

/// Applies a previously validated instruction. Throws std::logic_error if
/// called with a failed validation; the executor must never apply an
/// unvalidated write.
void apply_write(Workspace& ws, const WriteInstruction& instr,
                 const ValidationResult& validation);

/// Records one finished node visit in `sys`: increments step, adds the
/// correction attempts spent, appends the node id to the visit log.
void note_step_completed(Workspace& ws, const std::string& node_id, int corrections_used);

bool answer_empty(const Workspace& ws);
/// String answers verbatim; anything else as compact JSON.
std::string answer_text(const Workspace& ws);

Json workspace_to_json(const Workspace& ws);
Workspace workspace_from_json(const Json& doc);

/// Canonical form: two-space-indented JSON with lexicographically ordered
/// keys. Equal workspaces serialize byte-identically.
std::string serialize_workspace(const Workspace& ws);

} // namespace bigmas
