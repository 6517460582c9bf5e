#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "bigmas/json.hpp"

namespace bigmas {

/// Which part of a run issued a model call. Token accounting is kept per
/// phase so reports can split budget between design, routing, and node
/// execution (baselines use their own phase).
enum class Phase { Design, Routing, NodeExecution, Baseline };

std::string phase_name(Phase p);

struct Usage {
    std::int64_t calls = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }
};

/// Thread-safe per-phase call and token counters.
class UsageLedger {
public:
    void add(Phase phase, std::int64_t prompt_tokens, std::int64_t completion_tokens);
    void merge(const UsageLedger& other);

    Usage phase_usage(Phase phase) const;
    Usage total() const;
    Json to_json() const;

private:
    mutable std::mutex mu_;
    std::map<Phase, Usage> by_phase_;
};

/// A model call failed and cannot be satisfied (network failure after
/// retries, malformed provider response, missing credentials).
class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scripted backend ran out of responses: the test script does not
/// cover the prompts the code actually issued. Always a bug in the
/// script, so it derives from logic_error and is never caught by runs.
class ScriptError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string name() const = 0;
    /// Returns the model's text completion for a system+user prompt pair.
    /// max_tokens caps the output (0 = backend default). Throws
    /// GatewayError when no completion can be produced.
    virtual std::string generate(Phase phase, const std::string& system,
                                 const std::string& user, int max_tokens) = 0;
};

/// Deterministic offline backend. Responses are resolved in order:
/// exact prompt fingerprint, then the phase's response queue (consumed
/// front to back), then the phase's repeating default. No match throws
/// ScriptError. Usage is estimated at one token per four characters.
class ScriptedBackend : public ModelBackend {
public:
    explicit ScriptedBackend(UsageLedger& ledger) : ledger_(ledger) {}

    std::string name() const override { return "scripted"; }
    std::string generate(Phase phase, const std::string& system,
                         const std::string& user, int max_tokens) override;

    void push_response(Phase phase, std::string text);
    void set_default(Phase phase, std::string text);
    void map_fingerprint(const std::string& fingerprint, std::string text);

    /// Stable 16-hex-digit digest of (phase, system, user); used to pin a
    /// scripted response to one exact prompt.
    static std::string fingerprint(Phase phase, const std::string& system,
                                   const std::string& user);

private:
    UsageLedger& ledger_;
    std::mutex mu_;
    std::map<std::string, std::string> by_fingerprint_;
    std::map<Phase, std::deque<std::string>> queues_;
    std::map<Phase, std::string> defaults_;
};

/// Loads a scripted-response manifest (one JSON object per line) into the
/// backend. Each entry needs "response" plus either "fingerprint" or
/// "phase" ("design", "routing", "node_execution", "baseline"); phase
/// entries install a repeating default unless "repeat" is false, in which
/// case they are queued one-shot in file order. Throws std::runtime_error
/// on unreadable files or malformed entries.
void load_script_manifest(const std::string& path, ScriptedBackend& backend);

struct HttpBackendConfig {
    std::string base_url; // e.g. "http://localhost:8080/v1"
    std::string api_key;
    std::string model = "gpt-4o-mini";
    double temperature = 0.7;
    int max_tokens = 1024;
    int timeout_seconds = 60;
    int max_attempts = 3;     // total tries per call
    int backoff_base_ms = 1000;

    /// Fills unset fields from BIGMAS_API_KEY / OPENAI_API_KEY,
    /// BIGMAS_BASE_URL / OPENAI_BASE_URL and BIGMAS_MODEL.
    static HttpBackendConfig from_env();
};

/// OpenAI-compatible chat-completions client. Retries timeouts, 429 and
/// 5xx with exponential backoff; other 4xx fail immediately. Token usage
/// comes from the provider's usage block when present, otherwise from a
/// four-characters-per-token estimate.
class HttpBackend : public ModelBackend {
public:
    HttpBackend(HttpBackendConfig config, UsageLedger& ledger);
    ~HttpBackend() override;

    std::string name() const override { return "http"; }
    std::string generate(Phase phase, const std::string& system,
                         const std::string& user, int max_tokens) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace bigmas
