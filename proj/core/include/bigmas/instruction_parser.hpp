#pragma once

#include <string>
#include <vector>

#include "bigmas/workspace.hpp"

namespace bigmas {

struct ParseOutcome {
    bool ok = false;
    WriteInstruction instruction;
    int strategy_used = 0; // 1..4, 0 when nothing matched
    std::vector<std::string> diagnostics; // one note per strategy that failed
};

/// Extracts a write instruction from free-form model output. Strategies,
/// tried in order until one yields a complete instruction:
///   1. the whole reply is one JSON object,
///   2. the last fenced code block holds one,
///   3. the last balanced JSON object mentioning "action" anywhere in the
///      reply,
///   4. "target_path:" / "action:" / "payload:" header lines, with the
///      payload running to the end of the reply.
/// The object form uses keys target_path (dot string or string array),
/// action (append|update|replace), payload (any JSON). Never throws; a
/// reply with no recoverable instruction returns ok=false so the caller
/// can route the failure into the correction loop.
ParseOutcome parse_write_instruction(const std::string& text);

} // namespace bigmas
