#include "bigmas/baselines.hpp"

#include <algorithm>
#include <cctype>

#include "bigmas/text_scan.hpp"

namespace bigmas::baselines {

std::string kind_name(Kind k) {
    switch (k) {
    case Kind::Base: return "base";
    case Kind::React: return "react";
    case Kind::Tot: return "tot";
    }
    return "base";
}

bool parse_kind(const std::string& text, Kind& out) {
    const std::string low = to_lower_copy(trim_copy(text));
    if (low == "base") { out = Kind::Base; return true; }
    if (low == "react") { out = Kind::React; return true; }
    if (low == "tot") { out = Kind::Tot; return true; }
    return false;
}

std::string extract_tagged_answer(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') { lines.push_back(cur); cur.clear(); }
        else cur += c;
    }
    lines.push_back(cur);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const std::string line = trim_copy(*it);
        const std::string low = to_lower_copy(line);
        if (low.rfind("answer:", 0) == 0)
            return trim_copy(line.substr(7));
    }
    return trim_copy(text);
}

namespace {

struct ReactAction {
    enum Kind { None, Check, Finish } kind = None;
    std::string arg;
};

/// The last well-formed check[...] or finish[...] in the reply wins.
/// Bracket content is matched with nesting so arguments may themselves
/// contain brackets (move lists, for instance).
ReactAction parse_react_action(const std::string& text) {
    const std::string low = to_lower_copy(text);
    ReactAction best;
    std::size_t best_pos = std::string::npos;
    for (const char* kw : {"check", "finish"}) {
        const std::string opener = std::string(kw) + "[";
        std::size_t from = 0;
        while (true) {
            std::size_t p = low.find(opener, from);
            if (p == std::string::npos) break;
            from = p + 1;
            if (p > 0 && (std::isalnum(static_cast<unsigned char>(low[p - 1])) ||
                          low[p - 1] == '_'))
                continue; // part of a longer word, not an action
            std::size_t i = p + opener.size();
            int depth = 1;
            while (i < text.size() && depth > 0) {
                if (text[i] == '[') ++depth;
                else if (text[i] == ']') --depth;
                ++i;
            }
            if (depth != 0) continue; // bracket never closes
            if (best_pos == std::string::npos || p > best_pos) {
                best_pos = p;
                best.kind = opener[0] == 'c' ? ReactAction::Check : ReactAction::Finish;
                best.arg = trim_copy(text.substr(p + opener.size(),
                                                 i - 1 - (p + opener.size())));
            }
        }
    }
    return best;
}

/// First integer in the reply, clamped to [1,10]; anything unparsable
/// counts as 1.
int parse_rating(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        long value = 0;
        bool negative = i > 0 && text[i - 1] == '-';
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (value < 1000) value = value * 10 + (text[i] - '0');
            ++i;
        }
        if (negative) value = -value;
        return static_cast<int>(std::clamp(value, 1L, 10L));
    }
    return 1;
}

struct CallTracker {
    ModelBackend& backend;
    const RunConfig& run_cfg;
    UsageLedger& ledger;
    BaselineResult& result;

    std::string operator()(const std::string& system, const std::string& user,
                           Json& calls_out) {
        Usage before = ledger.total();
        std::string reply =
            backend.generate(Phase::Baseline, system, user, run_cfg.max_tokens_node);
        Usage after = ledger.total();
        calls_out.push_back(Json{
            {"phase", "baseline"},
            {"prompt_tokens", after.prompt_tokens - before.prompt_tokens},
            {"completion_tokens", after.completion_tokens - before.completion_tokens}});
        ++result.calls;
        return reply;
    }
};

Json step_record(int index, const std::string& node, const std::string& response,
                 Json calls) {
    return Json{{"type", "step"},
                {"index", index},
                {"node", node},
                {"responses", Json::array({response})},
                {"calls", std::move(calls)}};
}

} // namespace

BaselineResult run_base(const tasks::Instance& instance, ModelBackend& backend,
                        const RunConfig& run_cfg, UsageLedger& ledger) {
    BaselineResult result;
    CallTracker call{backend, run_cfg, ledger, result};
    const std::string system =
        "You are a careful solver of constrained puzzles. Work the problem out, "
        "then give your final answer on the last line as 'ANSWER: <answer>'.";
    try {
        Json calls = Json::array();
        const std::string reply = call(system, tasks::render_context(instance), calls);
        result.answer = extract_tagged_answer(reply);
        result.steps.push_back(step_record(0, "base", reply, std::move(calls)));
    } catch (const GatewayError& e) {
        result.error = e.what();
        result.answer.clear();
    }
    return result;
}

BaselineResult run_react(const tasks::Instance& instance, ModelBackend& backend,
                         const BaselineConfig& cfg, const RunConfig& run_cfg,
                         UsageLedger& ledger) {
    BaselineResult result;
    CallTracker call{backend, run_cfg, ledger, result};
    const std::string system =
        "You are solving a constrained puzzle through a thought/action loop.\n"
        "Each turn, write a short thought, then end your reply with exactly one "
        "action on its own line:\n"
        "- check[candidate] tests a candidate answer; the observation reports the "
        "verifier's verdict.\n"
        "- finish[answer] submits the final answer and stops.\n"
        "Refine your candidates using the observations.";
    std::string transcript = tasks::render_context(instance);
    std::string last_check;
    try {
        for (int turn = 0; turn < cfg.react_max_turns; ++turn) {
            Json calls = Json::array();
            const std::string reply = call(system, transcript, calls);
            const ReactAction action = parse_react_action(reply);
            std::string observation;
            if (action.kind == ReactAction::Finish) {
                result.answer = action.arg;
                result.steps.push_back(step_record(turn, "react", reply, std::move(calls)));
                return result;
            }
            if (action.kind == ReactAction::Check) {
                last_check = action.arg;
                tasks::Verdict v = tasks::verify(instance, action.arg);
                observation = v.correct
                    ? "Observation: correct. Submit it with finish[...]."
                    : "Observation: incorrect: " + v.reason;
            } else {
                observation = "Observation: no action found. End your reply with "
                              "check[candidate] or finish[answer].";
            }
            Json rec = step_record(turn, "react", reply, std::move(calls));
            rec["observation"] = observation;
            result.steps.push_back(std::move(rec));
            transcript += "\n\n" + trim_copy(reply) + "\n" + observation;
        }
        result.answer = last_check; // turn budget spent without finish[...]
    } catch (const GatewayError& e) {
        result.error = e.what();
        result.answer.clear();
    }
    return result;
}

BaselineResult run_tot(const tasks::Instance& instance, ModelBackend& backend,
                       const BaselineConfig& cfg, const RunConfig& run_cfg,
                       UsageLedger& ledger) {
    BaselineResult result;
    CallTracker call{backend, run_cfg, ledger, result};
    const std::string propose_system =
        "You are exploring candidate answers for a constrained puzzle. Propose one "
        "complete candidate answer. End your reply with 'ANSWER: <candidate>'.";
    const std::string rate_system =
        "You rate candidate answers for a constrained puzzle. Reply with a single "
        "integer from 1 (hopeless) to 10 (certainly correct), and nothing else.";
    const std::string context = tasks::render_context(instance);

    std::string frontier;
    std::string best_answer;
    int best_rating = 0;
    int index = 0;
    try {
        for (int round = 0; round < cfg.tot_max_rounds; ++round) {
            std::vector<std::string> candidates;
            for (int i = 0; i < cfg.tot_n_thoughts; ++i) {
                std::string user = context + "\n\n";
                user += frontier.empty()
                    ? "No candidate so far. Propose a first complete candidate."
                    : "Best candidate so far:\n" + frontier +
                      "\nPropose a new or improved complete candidate.";
                Json calls = Json::array();
                const std::string reply = call(propose_system, user, calls);
                candidates.push_back(extract_tagged_answer(reply));
                Json rec = step_record(index++, "tot-propose", reply, std::move(calls));
                rec["round"] = round;
                result.steps.push_back(std::move(rec));
            }
            // A verifying candidate ends the search before any rating calls.
            for (const std::string& cand : candidates) {
                if (tasks::verify(instance, cand).correct) {
                    result.answer = cand;
                    return result;
                }
            }
            int round_best = 0;
            int round_best_rating = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                Json calls = Json::array();
                const std::string reply =
                    call(rate_system, context + "\n\nCandidate:\n" + candidates[i], calls);
                const int rating = parse_rating(reply);
                Json rec = step_record(index++, "tot-rate", reply, std::move(calls));
                rec["round"] = round;
                rec["rating"] = rating;
                result.steps.push_back(std::move(rec));
                if (rating > round_best_rating) { // ties keep the earlier candidate
                    round_best_rating = rating;
                    round_best = static_cast<int>(i);
                }
            }
            frontier = candidates[static_cast<std::size_t>(round_best)];
            if (round_best_rating > best_rating) {
                best_rating = round_best_rating;
                best_answer = frontier;
            }
        }
        result.answer = best_answer;
    } catch (const GatewayError& e) {
        result.error = e.what();
        result.answer.clear();
    }
    return result;
}

BaselineResult run_baseline(const tasks::Instance& instance, ModelBackend& backend,
                            const BaselineConfig& cfg, const RunConfig& run_cfg,
                            UsageLedger& ledger) {
    switch (cfg.kind) {
    case Kind::Base: return run_base(instance, backend, run_cfg, ledger);
    case Kind::React: return run_react(instance, backend, cfg, run_cfg, ledger);
    case Kind::Tot: return run_tot(instance, backend, cfg, run_cfg, ledger);
    }
    return run_base(instance, backend, run_cfg, ledger);
}

} // namespace bigmas::baselines
