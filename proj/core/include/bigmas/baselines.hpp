#pragma once

#include <string>
#include <vector>

#include "bigmas/json.hpp"
#include "bigmas/model_gateway.hpp"
#include "bigmas/run_config.hpp"
#include "bigmas/tasks.hpp"

namespace bigmas::baselines {

enum class Kind { Base, React, Tot };

std::string kind_name(Kind k); // "base" | "react" | "tot"
bool parse_kind(const std::string& text, Kind& out);

struct BaselineConfig {
    Kind kind = Kind::Base;
    int react_max_turns = 10;
    int tot_max_rounds = 4;
    int tot_n_thoughts = 3;
    double temperature = 0.7;
};

/// One comparison run. `steps` holds trace-shaped records (one per model
/// call or turn) so baseline runs serialize like graph runs, just without
/// design or routing content.
struct BaselineResult {
    std::string answer;
    int calls = 0;
    Json steps = Json::array();
    std::string error; // gateway failure text; empty on clean runs
};

/// Last line tagged `ANSWER:` (case-insensitive), stripped and trimmed;
/// falls back to the whole trimmed text when no line carries the tag.
std::string extract_tagged_answer(const std::string& text);

/// Single direct call, no scaffolding.
BaselineResult run_base(const tasks::Instance& instance, ModelBackend& backend,
                        const RunConfig& run_cfg, UsageLedger& ledger);

/// Thought/action loop with two verifier-backed actions: check[candidate]
/// (observation = the verifier's verdict) and finish[answer]. Stops on
/// finish or after react_max_turns; on exhaustion the last check argument
/// becomes the answer.
BaselineResult run_react(const tasks::Instance& instance, ModelBackend& backend,
                         const BaselineConfig& cfg, const RunConfig& run_cfg,
                         UsageLedger& ledger);

/// Width-1 tree search: per round, tot_n_thoughts proposal calls, then one
/// 1-10 rating call per candidate (unparsable ratings count as 1). A
/// verifying candidate ends the search before that round's ratings. After
/// the last round the best verified candidate wins, else the best-rated.
BaselineResult run_tot(const tasks::Instance& instance, ModelBackend& backend,
                       const BaselineConfig& cfg, const RunConfig& run_cfg,
                       UsageLedger& ledger);

/// Dispatch on cfg.kind.
BaselineResult run_baseline(const tasks::Instance& instance, ModelBackend& backend,
                            const BaselineConfig& cfg, const RunConfig& run_cfg,
                            UsageLedger& ledger);

} // namespace bigmas::baselines
