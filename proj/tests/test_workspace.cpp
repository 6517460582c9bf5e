#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bigmas/workspace.hpp"

using namespace bigmas;

namespace {

Json chain_schema() {
    return Json{{"candidates", Json::array()},
                {"validated", Json::object()},
                {"plan", Json{{"status", "open"}, {"notes", Json::array()}}}};
}

WriteInstruction make(std::vector<std::string> path, WriteAction action, Json payload) {
    WriteInstruction w;
    w.path = std::move(path);
    w.action = action;
    w.payload = std::move(payload);
    return w;
}

} // namespace

TEST_CASE("init builds the four partitions") {
    Workspace ws = init_workspace("the problem", chain_schema());
    CHECK(ws.ctx == "the problem");
    CHECK(ws.work == chain_schema());
    CHECK(ws.sys["step"] == 0);
    CHECK(ws.sys["corrections"] == 0);
    CHECK(ws.sys["visited"].is_array());
    CHECK(ws.ans.is_null());
    CHECK(answer_empty(ws));
}

TEST_CASE("schema rejections") {
    CHECK_THROWS_AS(init_workspace("c", Json::array()), SchemaError);
    CHECK_THROWS_AS(init_workspace("c", Json("text")), SchemaError);
    CHECK_THROWS_AS(init_workspace("c", Json{{"answer", Json::array()}}), SchemaError);
    // Dots anywhere in the key tree would collide with path syntax.
    CHECK_THROWS_AS(init_workspace("c", Json{{"a.b", 1}}), SchemaError);
    CHECK_THROWS_AS(init_workspace("c", Json{{"outer", Json{{"in.ner", 1}}}}), SchemaError);
}

TEST_CASE("validation checks run in a fixed order") {
    Workspace ws = init_workspace("c", chain_schema());

    SUBCASE("unknown path") {
        auto r = validate_write(ws, make({"missing"}, WriteAction::Append, "x"), false);
        CHECK_FALSE(r.pass);
        CHECK(r.code == "unknown-path");
    }
    SUBCASE("nested unknown path") {
        auto r = validate_write(ws, make({"plan", "missing"}, WriteAction::Replace, "x"),
                                false);
        CHECK(r.code == "unknown-path");
    }
    SUBCASE("answer slot is sink-only") {
        auto r = validate_write(ws, make({"answer"}, WriteAction::Replace, "42"), false);
        CHECK(r.code == "answer-write-by-non-sink");
        CHECK(validate_write(ws, make({"answer"}, WriteAction::Replace, "42"), true).pass);
    }
    SUBCASE("append requires a list") {
        auto r = validate_write(ws, make({"validated"}, WriteAction::Append, "x"), false);
        CHECK(r.code == "type-mismatch");
        CHECK(validate_write(ws, make({"candidates"}, WriteAction::Append, "x"), false).pass);
    }
    SUBCASE("update requires a dict and an object payload") {
        CHECK(validate_write(ws, make({"candidates"}, WriteAction::Update,
                                      Json{{"k", 1}}), false)
                  .code == "type-mismatch");
        CHECK(validate_write(ws, make({"validated"}, WriteAction::Update, "plain"), false)
                  .code == "type-mismatch");
        CHECK(validate_write(ws, make({"validated"}, WriteAction::Update, Json{{"k", 1}}),
                             false)
                  .pass);
    }
    SUBCASE("answer accepts replace only") {
        CHECK(validate_write(ws, make({"answer"}, WriteAction::Append, "x"), true).code ==
              "type-mismatch");
        CHECK(validate_write(ws, make({"answer"}, WriteAction::Update, Json{{"k", 1}}),
                             true)
                  .code == "type-mismatch");
    }
    SUBCASE("empty payloads are rejected for every action") {
        CHECK(validate_write(ws, make({"candidates"}, WriteAction::Append, Json()), false)
                  .code == "empty-payload");
        CHECK(validate_write(ws, make({"candidates"}, WriteAction::Append, ""), false)
                  .code == "empty-payload");
        CHECK(validate_write(ws, make({"validated"}, WriteAction::Update, Json::object()),
                             false)
                  .code == "empty-payload");
        CHECK(validate_write(ws, make({"plan", "status"}, WriteAction::Replace,
                                      Json::array()),
                             false)
                  .code == "empty-payload");
        CHECK(validate_write(ws, make({"answer"}, WriteAction::Replace, ""), true).code ==
              "empty-payload");
    }
    SUBCASE("path check wins over action and payload checks") {
        auto r = validate_write(ws, make({"missing"}, WriteAction::Update, Json()), false);
        CHECK(r.code == "unknown-path");
    }
}

TEST_CASE("apply semantics per action") {
    Workspace ws = init_workspace("c", chain_schema());

    auto apply_ok = [&ws](const WriteInstruction& w, bool sink = false) {
        auto r = validate_write(ws, w, sink);
        REQUIRE(r.pass);
        apply_write(ws, w, r);
    };

    apply_ok(make({"candidates"}, WriteAction::Append, "6*4"));
    apply_ok(make({"candidates"}, WriteAction::Append, "3*8"));
    CHECK(ws.work["candidates"] == Json::array({"6*4", "3*8"}));

    apply_ok(make({"validated"}, WriteAction::Update, Json{{"6*4", true}}));
    apply_ok(make({"validated"}, WriteAction::Update, Json{{"3*8", false}, {"6*4", false}}));
    CHECK(ws.work["validated"] == Json{{"6*4", false}, {"3*8", false}}); // update merges

    apply_ok(make({"plan", "status"}, WriteAction::Replace, "done"));
    CHECK(ws.work["plan"]["status"] == "done");

    apply_ok(make({"answer"}, WriteAction::Replace, "24=6*4"), true);
    CHECK_FALSE(answer_empty(ws));
    CHECK(answer_text(ws) == "24=6*4");
}

TEST_CASE("apply refuses unvalidated writes") {
    Workspace ws = init_workspace("c", chain_schema());
    auto w = make({"candidates"}, WriteAction::Append, "x");
    ValidationResult failed{false, "unknown-path", "nope"};
    CHECK_THROWS_AS(apply_write(ws, w, failed), std::logic_error);
}

TEST_CASE("failed validation leaves the workspace untouched") {
    Workspace ws = init_workspace("c", chain_schema());
    const std::string before = serialize_workspace(ws);
    auto r = validate_write(ws, make({"nope"}, WriteAction::Replace, "x"), false);
    CHECK_FALSE(r.pass);
    CHECK(serialize_workspace(ws) == before);
}

TEST_CASE("step bookkeeping accumulates") {
    Workspace ws = init_workspace("c", chain_schema());
    note_step_completed(ws, "generator", 0);
    note_step_completed(ws, "validator", 2);
    CHECK(ws.sys["step"] == 2);
    CHECK(ws.sys["corrections"] == 2);
    CHECK(ws.sys["visited"] == Json::array({"generator", "validator"}));
}

TEST_CASE("answer text is verbatim for strings, compact JSON otherwise") {
    Workspace ws = init_workspace("c", chain_schema());
    ws.ans = "plain text";
    CHECK(answer_text(ws) == "plain text");
    ws.ans = Json{{"moves", Json::array({Json::array({1, 3})})}};
    CHECK(answer_text(ws) == "{\"moves\":[[1,3]]}");
}

TEST_CASE("serialization is canonical and round-trips") {
    Workspace a = init_workspace("c", Json{{"zebra", 1}, {"alpha", 2}});
    Workspace b = init_workspace("c", Json{{"alpha", 2}, {"zebra", 1}});
    CHECK(serialize_workspace(a) == serialize_workspace(b));

    note_step_completed(a, "n1", 1);
    a.ans = "done";
    Workspace back = workspace_from_json(workspace_to_json(a));
    CHECK(serialize_workspace(back) == serialize_workspace(a));
}

TEST_CASE("write action names round-trip case-insensitively") {
    WriteAction a;
    CHECK(parse_write_action("APPEND", a));
    CHECK(a == WriteAction::Append);
    CHECK(parse_write_action("Update", a));
    CHECK(a == WriteAction::Update);
    CHECK(parse_write_action(" replace ", a));
    CHECK(a == WriteAction::Replace);
    CHECK_FALSE(parse_write_action("upsert", a));
    for (auto action : {WriteAction::Append, WriteAction::Update, WriteAction::Replace}) {
        WriteAction parsed;
        CHECK(parse_write_action(write_action_name(action), parsed));
        CHECK(parsed == action);
    }
}
