#pragma once

#include <string>
#include <vector>

#include "bigmas/executor.hpp"
#include "bigmas/json.hpp"
#include "bigmas/tasks.hpp"

namespace bigmas {

/// Run traces are JSONL: one header record, one record per step, one
/// result record. They carry no timestamps, so identical runs produce
/// byte-identical files.

Json run_header_record(const tasks::Instance& instance, const std::string& method,
                       const RunConfig& config, const DesignResult* design);
Json run_result_record(const ExecutionResult& result, const tasks::Verdict& verdict,
                       const UsageLedger& ledger);

/// header + steps + result for one full run.
std::vector<Json> build_run_trace(const tasks::Instance& instance, const RunConfig& config,
                                  const DesignResult& design, const ExecutionResult& result,
                                  const tasks::Verdict& verdict, const UsageLedger& ledger);

void write_jsonl(const std::string& path, const std::vector<Json>& records);
std::vector<Json> load_jsonl(const std::string& path);

struct ReplayOutcome {
    bool ok = false;
    std::string error;
    Workspace workspace; // state rebuilt from the trace
};

/// Rebuilds the final workspace from a trace: fresh workspace from the
/// header's schema, each step's applied write plus its bookkeeping, then
/// the fallback answer if one was recorded. ok iff the rebuilt state
/// matches the result record's workspace byte for byte.
ReplayOutcome replay_trace(const std::vector<Json>& records);

} // namespace bigmas
