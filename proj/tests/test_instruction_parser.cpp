#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bigmas/instruction_parser.hpp"

using namespace bigmas;

namespace {

const char* kPlainObject =
    R"({"target_path":"candidates","action":"append","payload":{"expr":"6*4"}})";

bool same_instruction(const WriteInstruction& a, const WriteInstruction& b) {
    return a.path == b.path && a.action == b.action && a.payload == b.payload;
}

} // namespace

TEST_CASE("strategy 1: whole reply is the object") {
    auto out = parse_write_instruction(kPlainObject);
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 1);
    CHECK(out.instruction.path == std::vector<std::string>{"candidates"});
    CHECK(out.instruction.action == WriteAction::Append);
    CHECK(out.instruction.payload == Json{{"expr", "6*4"}});
    CHECK(out.diagnostics.empty());
}

TEST_CASE("strategy 2: last fenced block wins") {
    std::string reply = "Let me think.\n```json\n"
                        R"({"target_path":"candidates","action":"append","payload":"first"})"
                        "\n```\nActually, better:\n```json\n"
                        R"({"target_path":"candidates","action":"append","payload":"second"})"
                        "\n```\ndone.";
    auto out = parse_write_instruction(reply);
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 2);
    CHECK(out.instruction.payload == "second");
    // Exactly one earlier strategy failed before it.
    CHECK(out.diagnostics.size() == 1);
}

TEST_CASE("strategy 3: last embedded object mentioning action") {
    std::string reply =
        "My write will be {\"target_path\": \"validated\", \"action\": \"update\", "
        "\"payload\": {\"6*4\": true}} as discussed above.";
    auto out = parse_write_instruction(reply);
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 3);
    CHECK(out.instruction.action == WriteAction::Update);
    CHECK(out.instruction.payload == Json{{"6*4", true}});
}

TEST_CASE("strategy 4: header lines with JSON payload") {
    auto out = parse_write_instruction(
        "target_path: candidates\naction: APPEND\npayload: {\"expr\":\"6*4\"}");
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 4);
    CHECK(out.instruction.action == WriteAction::Append); // normalized
    CHECK(out.instruction.payload == Json{{"expr", "6*4"}});
}

TEST_CASE("strategy 4: multi-line payload falls back to text") {
    auto out = parse_write_instruction(
        "target_path: plan.notes\naction: replace\npayload: first line\nsecond line");
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 4);
    CHECK(out.instruction.path == std::vector<std::string>{"plan", "notes"});
    REQUIRE(out.instruction.payload.is_string());
    CHECK(out.instruction.payload.get<std::string>().find("second line") !=
          std::string::npos);
}

TEST_CASE("path forms: dot string and segment array") {
    auto dotted = parse_write_instruction(
        R"({"target_path":"plan.notes","action":"append","payload":"n"})");
    REQUIRE(dotted.ok);
    CHECK(dotted.instruction.path == std::vector<std::string>{"plan", "notes"});

    auto arr = parse_write_instruction(
        R"({"target_path":["plan","notes"],"action":"append","payload":"n"})");
    REQUIRE(arr.ok);
    CHECK(arr.instruction.path == std::vector<std::string>{"plan", "notes"});

    // "path" is accepted as an alias for target_path.
    auto alias = parse_write_instruction(
        R"({"path":"candidates","action":"append","payload":"n"})");
    REQUIRE(alias.ok);
    CHECK(alias.instruction.path == std::vector<std::string>{"candidates"});
}

TEST_CASE("malformed paths and actions are rejected with diagnostics") {
    auto empty_seg = parse_write_instruction(
        R"({"target_path":"a..b","action":"append","payload":"n"})");
    CHECK_FALSE(empty_seg.ok);

    auto bad_action = parse_write_instruction(
        R"({"target_path":"candidates","action":"upsert","payload":"n"})");
    CHECK_FALSE(bad_action.ok);

    auto nothing = parse_write_instruction("free prose with no structure at all");
    CHECK_FALSE(nothing.ok);
    CHECK(nothing.strategy_used == 0);
    CHECK(nothing.diagnostics.size() == 4); // one note per strategy
}

TEST_CASE("missing payload key becomes a null payload") {
    auto out = parse_write_instruction(R"({"target_path":"candidates","action":"append"})");
    REQUIRE(out.ok);
    CHECK(out.instruction.payload.is_null()); // validation rejects it downstream
}

TEST_CASE("unknown extra keys are ignored") {
    auto out = parse_write_instruction(
        R"({"target_path":"candidates","action":"append","payload":"x","mood":"upbeat"})");
    REQUIRE(out.ok);
    CHECK(out.strategy_used == 1);
}

TEST_CASE("strategy monotonicity: wrapping moves the strategy index up, not down") {
    auto direct = parse_write_instruction(kPlainObject);
    REQUIRE(direct.ok);

    auto fenced = parse_write_instruction("prose\n```json\n" + std::string(kPlainObject) +
                                          "\n```\n");
    REQUIRE(fenced.ok);
    CHECK(fenced.strategy_used <= 2);
    CHECK(same_instruction(fenced.instruction, direct.instruction));

    auto embedded = parse_write_instruction("prose " + std::string(kPlainObject) +
                                            " more prose");
    REQUIRE(embedded.ok);
    CHECK(embedded.strategy_used <= 3);
    CHECK(same_instruction(embedded.instruction, direct.instruction));
}

TEST_CASE("normalization idempotence: reserialized instructions reparse via strategy 1") {
    const char* samples[] = {
        kPlainObject,
        "target_path: plan.notes\naction: replace\npayload: text body",
        "```json\n{\"target_path\":[\"validated\"],\"action\":\"update\","
        "\"payload\":{\"k\":1}}\n```",
    };
    for (const char* sample : samples) {
        auto first = parse_write_instruction(sample);
        REQUIRE(first.ok);
        auto second = parse_write_instruction(first.instruction.to_json().dump());
        REQUIRE(second.ok);
        CHECK(second.strategy_used == 1);
        CHECK(same_instruction(first.instruction, second.instruction));
    }
}

TEST_CASE("fuzz: parser never throws on arbitrary bytes") {
    std::mt19937_64 rng(0x5eed);
    const std::string alphabet =
        "{}[]\":,.\n `atpcdrn_\\0123456789target_pathactionpayloadappend";
    for (int i = 0; i < 20000; ++i) {
        std::string text;
        const std::size_t len = rng() % 160;
        for (std::size_t j = 0; j < len; ++j) {
            if (rng() % 8 == 0)
                text += static_cast<char>(rng() % 256);
            else
                text += alphabet[rng() % alphabet.size()];
        }
        auto out = parse_write_instruction(text); // must not throw
        if (out.ok) CHECK(out.strategy_used >= 1);
    }
}
