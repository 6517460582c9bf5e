// Model backends: offline scripted responses and an OpenAI-compatible
// HTTP client, plus per-phase usage accounting.

#include "bigmas/model_gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace bigmas {

std::string phase_name(Phase p) {
    switch (p) {
    case Phase::Design: return "design";
    case Phase::Routing: return "routing";
    case Phase::NodeExecution: return "node_execution";
    case Phase::Baseline: return "baseline";
    }
    return "unknown";
}

namespace {

bool parse_phase_name(const std::string& text, Phase& out) {
    if (text == "design") { out = Phase::Design; return true; }
    if (text == "routing") { out = Phase::Routing; return true; }
    if (text == "node_execution") { out = Phase::NodeExecution; return true; }
    if (text == "baseline") { out = Phase::Baseline; return true; }
    return false;
}

std::int64_t estimate_tokens(std::size_t chars) {
    return static_cast<std::int64_t>((chars + 3) / 4);
}

} // namespace

void UsageLedger::add(Phase phase, std::int64_t prompt_tokens, std::int64_t completion_tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    Usage& u = by_phase_[phase];
    u.calls += 1;
    u.prompt_tokens += prompt_tokens;
    u.completion_tokens += completion_tokens;
}

void UsageLedger::merge(const UsageLedger& other) {
    std::map<Phase, Usage> copy;
    {
        std::lock_guard<std::mutex> lock(other.mu_);
        copy = other.by_phase_;
    }
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [phase, u] : copy) {
        Usage& mine = by_phase_[phase];
        mine.calls += u.calls;
        mine.prompt_tokens += u.prompt_tokens;
        mine.completion_tokens += u.completion_tokens;
    }
}

Usage UsageLedger::phase_usage(Phase phase) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_phase_.find(phase);
    return it == by_phase_.end() ? Usage{} : it->second;
}

Usage UsageLedger::total() const {
    std::lock_guard<std::mutex> lock(mu_);
    Usage sum;
    for (const auto& [phase, u] : by_phase_) {
        sum.calls += u.calls;
        sum.prompt_tokens += u.prompt_tokens;
        sum.completion_tokens += u.completion_tokens;
    }
    return sum;
}

Json UsageLedger::to_json() const {
    std::lock_guard<std::mutex> lock(mu_);
    Json out = Json::object();
    for (const auto& [phase, u] : by_phase_)
        out[phase_name(phase)] = Json{{"calls", u.calls},
                                      {"prompt_tokens", u.prompt_tokens},
                                      {"completion_tokens", u.completion_tokens}};
    return out;
}

std::string ScriptedBackend::generate(Phase phase, const std::string& system,
                                      const std::string& user, int) {
    std::string text;
    {
        std::lock_guard<std::mutex> lock(mu_);
        std::string fp = fingerprint(phase, system, user);
        if (auto it = by_fingerprint_.find(fp); it != by_fingerprint_.end()) {
            text = it->second;
        } else if (auto qit = queues_.find(phase); qit != queues_.end() && !qit->second.empty()) {
            text = std::move(qit->second.front());
            qit->second.pop_front();
        } else if (auto dit = defaults_.find(phase); dit != defaults_.end()) {
            text = dit->second;
        } else {
            throw ScriptError("scripted backend has no response left for phase '" +
                              phase_name(phase) + "'");
        }
    }
    ledger_.add(phase, estimate_tokens(system.size() + user.size()),
                estimate_tokens(text.size()));
    return text;
}

void ScriptedBackend::push_response(Phase phase, std::string text) {
    std::lock_guard<std::mutex> lock(mu_);
    queues_[phase].push_back(std::move(text));
}

void ScriptedBackend::set_default(Phase phase, std::string text) {
    std::lock_guard<std::mutex> lock(mu_);
    defaults_[phase] = std::move(text);
}

void ScriptedBackend::map_fingerprint(const std::string& fingerprint, std::string text) {
    std::lock_guard<std::mutex> lock(mu_);
    by_fingerprint_[fingerprint] = std::move(text);
}

std::string ScriptedBackend::fingerprint(Phase phase, const std::string& system,
                                         const std::string& user) {
    // FNV-1a over phase \x1f system \x1f user.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    std::string sep(1, '\x1f');
    mix(phase_name(phase));
    mix(sep);
    mix(system);
    mix(sep);
    mix(user);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void load_script_manifest(const std::string& path, ScriptedBackend& backend) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script manifest '" + path + "'");

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto where = [&] { return path + ":" + std::to_string(lineno); };

        Json entry = Json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.is_object())
            throw std::runtime_error(where() + ": not a JSON object");
        if (!entry.contains("response") || !entry["response"].is_string())
            throw std::runtime_error(where() + ": missing string 'response'");
        std::string response = entry["response"].get<std::string>();

        if (entry.contains("fingerprint")) {
            if (!entry["fingerprint"].is_string())
                throw std::runtime_error(where() + ": 'fingerprint' must be a string");
            backend.map_fingerprint(entry["fingerprint"].get<std::string>(), response);
            continue;
        }
        if (!entry.contains("phase") || !entry["phase"].is_string())
            throw std::runtime_error(where() + ": missing string 'phase'");
        Phase phase;
        if (!parse_phase_name(entry["phase"].get<std::string>(), phase))
            throw std::runtime_error(where() + ": unknown phase '" +
                                     entry["phase"].get<std::string>() + "'");
        if (entry.value("repeat", true))
            backend.set_default(phase, response);
        else
            backend.push_response(phase, response);
    }
}

HttpBackendConfig HttpBackendConfig::from_env() {
    HttpBackendConfig cfg;
    auto env = [](const char* primary, const char* fallback) -> std::string {
        if (const char* v = std::getenv(primary); v && *v) return v;
        if (fallback)
            if (const char* v = std::getenv(fallback); v && *v) return v;
        return {};
    };
    cfg.api_key = env("BIGMAS_API_KEY", "OPENAI_API_KEY");
    cfg.base_url = env("BIGMAS_BASE_URL", "OPENAI_BASE_URL");
    if (cfg.base_url.empty()) cfg.base_url = "https://api.openai.com/v1";
    if (std::string m = env("BIGMAS_MODEL", nullptr); !m.empty()) cfg.model = m;
    return cfg;
}

struct HttpBackend::Impl {
    HttpBackendConfig cfg;
    UsageLedger& ledger;
    std::string host_part;   // scheme://host[:port]
    std::string path_prefix; // e.g. "/v1", possibly empty

    Impl(HttpBackendConfig c, UsageLedger& l) : cfg(std::move(c)), ledger(l) {
        std::string url = cfg.base_url;
        while (!url.empty() && url.back() == '/') url.pop_back();
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos)
            throw GatewayError("base url '" + cfg.base_url + "' has no scheme");
        auto path_start = url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            host_part = url;
        } else {
            host_part = url.substr(0, path_start);
            path_prefix = url.substr(path_start);
        }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (host_part.rfind("https://", 0) == 0)
            throw GatewayError("https base url requires a build with TLS support");
#endif
    }

    std::string call(Phase phase, const std::string& system, const std::string& user,
                     int max_tokens) {
        Json body = {
            {"model", cfg.model},
            {"messages",
             Json::array({Json{{"role", "system"}, {"content", system}},
                          Json{{"role", "user"}, {"content", user}}})},
            {"temperature", cfg.temperature},
            {"max_tokens", max_tokens > 0 ? max_tokens : cfg.max_tokens},
        };
        std::string payload = body.dump();
        httplib::Headers headers;
        if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
        std::string path = path_prefix + "/chat/completions";

        std::string last_error;
        for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
            httplib::Client client(host_part);
            client.set_connection_timeout(cfg.timeout_seconds, 0);
            client.set_read_timeout(cfg.timeout_seconds, 0);
            client.set_write_timeout(cfg.timeout_seconds, 0);

            auto res = client.Post(path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
            } else if (res->status == 429 || res->status >= 500) {
                last_error = "status " + std::to_string(res->status);
            } else if (res->status >= 400) {
                throw GatewayError("model call rejected with status " +
                                   std::to_string(res->status) + ": " +
                                   res->body.substr(0, 400));
            } else {
                return read_completion(phase, system, user, res->body);
            }
            if (attempt < cfg.max_attempts) {
                auto delay = std::chrono::milliseconds(
                    static_cast<std::int64_t>(cfg.backoff_base_ms) << (attempt - 1));
                std::this_thread::sleep_for(delay);
            }
        }
        throw GatewayError("model call failed after " + std::to_string(cfg.max_attempts) +
                           " attempts (" + last_error + ")");
    }

    std::string read_completion(Phase phase, const std::string& system,
                                const std::string& user, const std::string& body) {
        Json doc = Json::parse(body, nullptr, false);
        if (doc.is_discarded())
            throw GatewayError("provider returned unparseable JSON");
        const Json* content = nullptr;
        if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
            const Json& choice = doc["choices"][0];
            if (choice.contains("message") && choice["message"].contains("content") &&
                choice["message"]["content"].is_string())
                content = &choice["message"]["content"];
        }
        if (!content)
            throw GatewayError("provider response has no choices[0].message.content");

        std::string text = content->get<std::string>();
        std::int64_t prompt_tokens = estimate_tokens(system.size() + user.size());
        std::int64_t completion_tokens = estimate_tokens(text.size());
        if (doc.contains("usage") && doc["usage"].is_object()) {
            const Json& u = doc["usage"];
            if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer())
                prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
            if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer())
                completion_tokens = u["completion_tokens"].get<std::int64_t>();
        }
        ledger.add(phase, prompt_tokens, completion_tokens);
        return text;
    }
};

HttpBackend::HttpBackend(HttpBackendConfig config, UsageLedger& ledger)
    : impl_(std::make_unique<Impl>(std::move(config), ledger)) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::generate(Phase phase, const std::string& system,
                                  const std::string& user, int max_tokens) {
    return impl_->call(phase, system, user, max_tokens);
}

} // namespace bigmas
