#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "bigmas/model_gateway.hpp"
#include "helpers.hpp"

using namespace bigmas;

TEST_CASE("ledger aggregates per phase and in total") {
    UsageLedger ledger;
    ledger.add(Phase::Design, 10, 5);
    ledger.add(Phase::Design, 10, 5);
    ledger.add(Phase::Routing, 3, 1);

    CHECK(ledger.phase_usage(Phase::Design).calls == 2);
    CHECK(ledger.phase_usage(Phase::Design).prompt_tokens == 20);
    CHECK(ledger.phase_usage(Phase::NodeExecution).calls == 0);
    CHECK(ledger.total().calls == 3);
    CHECK(ledger.total().total_tokens() == 34);

    Json doc = ledger.to_json();
    CHECK(doc["design"]["calls"] == 2);
    CHECK(doc["routing"]["completion_tokens"] == 1);

    UsageLedger other;
    other.add(Phase::Routing, 1, 1);
    other.merge(ledger);
    CHECK(other.phase_usage(Phase::Routing).calls == 2);
}

TEST_CASE("scripted backend resolves fingerprint, then queue, then default") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);

    backend.set_default(Phase::NodeExecution, "default reply");
    backend.push_response(Phase::NodeExecution, "queued 1");
    backend.push_response(Phase::NodeExecution, "queued 2");
    const std::string fp = ScriptedBackend::fingerprint(Phase::NodeExecution, "sys", "pin me");
    backend.map_fingerprint(fp, "pinned reply");

    CHECK(backend.generate(Phase::NodeExecution, "sys", "pin me", 0) == "pinned reply");
    CHECK(backend.generate(Phase::NodeExecution, "sys", "other", 0) == "queued 1");
    CHECK(backend.generate(Phase::NodeExecution, "sys", "other", 0) == "queued 2");
    CHECK(backend.generate(Phase::NodeExecution, "sys", "other", 0) == "default reply");
    CHECK(backend.generate(Phase::NodeExecution, "sys", "other", 0) == "default reply");
    // The fingerprint stays pinned even after the queue drains.
    CHECK(backend.generate(Phase::NodeExecution, "sys", "pin me", 0) == "pinned reply");

    // No script at all for this phase: a test-script bug, loudly reported.
    CHECK_THROWS_AS(backend.generate(Phase::Routing, "s", "u", 0), ScriptError);
}

TEST_CASE("scripted usage estimates one token per four characters, rounded up") {
    UsageLedger ledger;
    ScriptedBackend backend(ledger);
    backend.set_default(Phase::Baseline, "12345"); // 5 chars -> 2 tokens
    backend.generate(Phase::Baseline, "123", "4567", 0); // 7 prompt chars -> 2 tokens
    Usage u = ledger.phase_usage(Phase::Baseline);
    CHECK(u.calls == 1);
    CHECK(u.prompt_tokens == 2);
    CHECK(u.completion_tokens == 2);
}

TEST_CASE("fingerprints are stable and phase-sensitive") {
    const std::string a = ScriptedBackend::fingerprint(Phase::Design, "s", "u");
    CHECK(a == ScriptedBackend::fingerprint(Phase::Design, "s", "u"));
    CHECK(a != ScriptedBackend::fingerprint(Phase::Routing, "s", "u"));
    CHECK(a != ScriptedBackend::fingerprint(Phase::Design, "s", "u2"));
    CHECK(a.size() == 16);
    CHECK(a.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("manifest loading: defaults, one-shots, fingerprints, errors") {
    test_support::TempDir dir("gateway-manifest");
    UsageLedger ledger;

    SUBCASE("phase defaults and one-shot queues") {
        test_support::write_file(dir.file("m.jsonl"),
            "{\"phase\":\"design\",\"response\":\"design default\"}\n"
            "\n"
            "{\"phase\":\"routing\",\"response\":\"first\",\"repeat\":false}\n"
            "{\"phase\":\"routing\",\"response\":\"second\",\"repeat\":false}\n"
            "{\"phase\":\"routing\",\"response\":\"rest\"}\n");
        ScriptedBackend backend(ledger);
        load_script_manifest(dir.file("m.jsonl"), backend);
        CHECK(backend.generate(Phase::Design, "a", "b", 0) == "design default");
        CHECK(backend.generate(Phase::Design, "c", "d", 0) == "design default");
        CHECK(backend.generate(Phase::Routing, "a", "b", 0) == "first");
        CHECK(backend.generate(Phase::Routing, "a", "b", 0) == "second");
        CHECK(backend.generate(Phase::Routing, "a", "b", 0) == "rest");
    }
    SUBCASE("fingerprint entries") {
        const std::string fp = ScriptedBackend::fingerprint(Phase::NodeExecution, "s", "u");
        test_support::write_file(dir.file("m.jsonl"),
            "{\"fingerprint\":\"" + fp + "\",\"response\":\"exact\"}\n");
        ScriptedBackend backend(ledger);
        load_script_manifest(dir.file("m.jsonl"), backend);
        CHECK(backend.generate(Phase::NodeExecution, "s", "u", 0) == "exact");
    }
    SUBCASE("malformed entries name the line") {
        test_support::write_file(dir.file("bad.jsonl"),
                                 "{\"phase\":\"design\",\"response\":\"ok\"}\n"
                                 "{\"phase\":\"design\"}\n");
        ScriptedBackend backend(ledger);
        try {
            load_script_manifest(dir.file("bad.jsonl"), backend);
            FAIL("expected a manifest error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
        CHECK_THROWS_AS(load_script_manifest(dir.file("missing.jsonl"), backend),
                        std::runtime_error);
    }
}

namespace {

/// Minimal chat-completions stub. Behavior is driven by a per-test
/// script of status codes; the final 200 echoes a fixed completion.
class StubServer {
public:
    explicit StubServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         const int call = calls_.fetch_add(1);
                         last_body = req.body;
                         auto auth = req.get_header_value("Authorization");
                         if (!auth.empty()) last_auth = auth;
                         const int status =
                             call < static_cast<int>(statuses_.size()) ? statuses_[call] : 200;
                         if (status != 200) {
                             res.status = status;
                             res.set_content("{\"error\":\"scripted failure\"}",
                                             "application/json");
                             return;
                         }
                         Json body{{"choices",
                                    Json::array({Json{{"message",
                                                       Json{{"role", "assistant"},
                                                            {"content", "stub says hi"}}}}})},
                                   {"usage", Json{{"prompt_tokens", 41},
                                                  {"completion_tokens", 7}}}};
                         res.set_content(body.dump(), "application/json");
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }
    int calls() const { return calls_.load(); }
    std::string last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    std::vector<int> statuses_;
    std::atomic<int> calls_{0};
    int port_ = 0;
    std::thread thread_;
};

HttpBackendConfig local_config(int port) {
    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.api_key = "test-key";
    cfg.model = "stub-model";
    cfg.max_attempts = 3;
    cfg.backoff_base_ms = 1; // keep retry tests fast
    cfg.timeout_seconds = 5;
    return cfg;
}

} // namespace

TEST_CASE("http backend: success path carries auth, model, and provider usage") {
    StubServer server({200});
    UsageLedger ledger;
    HttpBackend backend(local_config(server.port()), ledger);

    std::string reply = backend.generate(Phase::NodeExecution, "sys prompt", "user prompt", 99);
    CHECK(reply == "stub says hi");
    CHECK(server.calls() == 1);
    CHECK(server.last_auth == "Bearer test-key");

    Json sent = Json::parse(server.last_body);
    CHECK(sent["model"] == "stub-model");
    CHECK(sent["max_tokens"] == 99);
    CHECK(sent["messages"][0]["role"] == "system");
    CHECK(sent["messages"][1]["content"] == "user prompt");

    Usage u = ledger.phase_usage(Phase::NodeExecution);
    CHECK(u.prompt_tokens == 41); // provider numbers win over the estimate
    CHECK(u.completion_tokens == 7);
}

TEST_CASE("http backend: zero max_tokens falls back to the configured cap") {
    StubServer server({200});
    UsageLedger ledger;
    auto cfg = local_config(server.port());
    cfg.max_tokens = 777;
    HttpBackend backend(std::move(cfg), ledger);
    backend.generate(Phase::Design, "s", "u", 0);
    CHECK(Json::parse(server.last_body)["max_tokens"] == 777);
}

TEST_CASE("http backend: retries 5xx and 429, then succeeds") {
    SUBCASE("500 twice") {
        StubServer server({500, 500, 200});
        UsageLedger ledger;
        HttpBackend backend(local_config(server.port()), ledger);
        CHECK(backend.generate(Phase::Routing, "s", "u", 0) == "stub says hi");
        CHECK(server.calls() == 3);
    }
    SUBCASE("429 once") {
        StubServer server({429, 200});
        UsageLedger ledger;
        HttpBackend backend(local_config(server.port()), ledger);
        CHECK(backend.generate(Phase::Routing, "s", "u", 0) == "stub says hi");
        CHECK(server.calls() == 2);
    }
}

TEST_CASE("http backend: retry budget exhausts into GatewayError") {
    StubServer server({500, 500, 500, 500});
    UsageLedger ledger;
    HttpBackend backend(local_config(server.port()), ledger);
    CHECK_THROWS_AS(backend.generate(Phase::Routing, "s", "u", 0), GatewayError);
    CHECK(server.calls() == 3); // max_attempts, no more
}

TEST_CASE("http backend: client errors fail immediately without retry") {
    StubServer server({400});
    UsageLedger ledger;
    HttpBackend backend(local_config(server.port()), ledger);
    CHECK_THROWS_AS(backend.generate(Phase::Routing, "s", "u", 0), GatewayError);
    CHECK(server.calls() == 1);
}

TEST_CASE("http backend: malformed base url is rejected up front") {
    UsageLedger ledger;
    HttpBackendConfig cfg;
    cfg.base_url = "localhost:8080"; // no scheme
    CHECK_THROWS_AS(HttpBackend(std::move(cfg), ledger), GatewayError);
}
