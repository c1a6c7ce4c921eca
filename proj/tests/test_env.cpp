#include "doctest.h"

#include "tandem/action.hpp"
#include "tandem/env.hpp"
#include "tandem/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

using namespace tandem;
using nlohmann::json;

namespace {

constexpr const char* kPackPath = "packs/mock_suite.json";
constexpr int kNoBudget = 1000;

// Minimal well-formed pack used as the base for validation mutations.
json tiny_pack() {
    return json::parse(R"json({
      "version": 1,
      "id": "tiny",
      "apps": [{
        "name": "a",
        "initial_screen": "s1",
        "screens": [
          {"id": "s1", "elements": [
            {"index": 1, "kind": "toggle", "label": "T", "state": "off"},
            {"index": 2, "kind": "input", "label": "I"},
            {"index": 3, "kind": "button", "label": "B"}
          ]},
          {"id": "s2", "back": "s1", "elements": []}
        ],
        "rules": [{"screen": "s1", "action": "tap(3)", "goto": "s2"}]
      }],
      "tasks": [{
        "id": "k1",
        "instruction": "flip the toggle",
        "app": "a",
        "kind": "operation",
        "risk": "low",
        "success": {"conditions": [
          {"type": "element_state", "screen": "s1", "index": 1, "state": "on"}
        ]},
        "gold": [
          {"when": [{"label": "T", "state": "off"}], "do": "tap(1)"},
          {"when": [{"label": "T", "state": "on"}], "do": "finish(\"done\")"}
        ]
      }]
    })json");
}

AppPack pack_from(const json& j) { return parse_pack(j.dump(), "test"); }

void expect_rejected(const json& j) {
    CHECK_THROWS_AS(pack_from(j), ConfigError);
}

} // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("the bundled pack loads with the hash of its bytes") {
    AppPack pack = load_pack(kPackPath);
    CHECK(pack.id == "mock_suite");
    CHECK(pack.version == 1);
    CHECK(pack.apps.size() == 5);
    CHECK(pack.tasks.size() == 23);

    std::ifstream in(kPackPath, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(pack.content_hash == fnv1a64(buf.str()));
}

TEST_CASE("seal_pack gives in-code packs a content-sensitive hash") {
    AppPack a = pack_from(tiny_pack());
    uint64_t from_text = a.content_hash;
    seal_pack(a);
    uint64_t sealed = a.content_hash;
    CHECK(sealed != 0);
    seal_pack(a);
    CHECK(a.content_hash == sealed); // stable under resealing

    AppPack b = pack_from(tiny_pack());
    b.tasks[0].instruction = "changed";
    seal_pack(b);
    CHECK(b.content_hash != sealed);
    (void)from_text;
}

TEST_CASE("structural problems are rejected at load time") {
    SUBCASE("version and id") {
        json j = tiny_pack();
        j["version"] = 0;
        expect_rejected(j);
        j = tiny_pack();
        j.erase("id");
        expect_rejected(j);
    }
    SUBCASE("apps must exist and have unique names") {
        json j = tiny_pack();
        j["apps"] = json::array();
        expect_rejected(j);
        j = tiny_pack();
        json copy = j["apps"][0];
        copy["screens"][0]["id"] = "other1";
        copy["screens"][1]["id"] = "other2";
        copy["screens"][1]["back"] = "other1";
        copy["initial_screen"] = "other1";
        copy["rules"] = json::array();
        j["apps"].push_back(copy); // same name "a"
        expect_rejected(j);
    }
    SUBCASE("screen ids are unique across the whole pack") {
        json j = tiny_pack();
        json copy = j["apps"][0];
        copy["name"] = "b";
        copy["rules"] = json::array();
        j["apps"].push_back(copy); // reuses s1/s2 ids
        expect_rejected(j);
    }
    SUBCASE("element indices must run 1..N") {
        json j = tiny_pack();
        j["apps"][0]["screens"][0]["elements"][0]["index"] = 5;
        expect_rejected(j);
    }
    SUBCASE("toggle state is on or off") {
        json j = tiny_pack();
        j["apps"][0]["screens"][0]["elements"][0]["state"] = "maybe";
        expect_rejected(j);
    }
    SUBCASE("only inputs can be focused") {
        json j = tiny_pack();
        j["apps"][0]["screens"][0]["elements"][2]["focused"] = true;
        expect_rejected(j);
    }
    SUBCASE("at most one focused input per screen") {
        json j = tiny_pack();
        j["apps"][0]["screens"][0]["elements"][1]["focused"] = true;
        j["apps"][0]["screens"][0]["elements"].push_back(
            {{"index", 4}, {"kind", "input"}, {"label", "J"}, {"focused", true}});
        expect_rejected(j);
    }
    SUBCASE("navigation targets must name known screens") {
        json j = tiny_pack();
        j["apps"][0]["screens"][1]["back"] = "nowhere";
        expect_rejected(j);
        j = tiny_pack();
        j["apps"][0]["initial_screen"] = "nowhere";
        expect_rejected(j);
    }
    SUBCASE("transition rules are validated and canonicalized") {
        json j = tiny_pack();
        j["apps"][0]["rules"][0]["screen"] = "nowhere";
        expect_rejected(j);
        j = tiny_pack();
        j["apps"][0]["rules"][0]["goto"] = "nowhere";
        expect_rejected(j);
        j = tiny_pack();
        j["apps"][0]["rules"][0]["action"] = "explode(1)";
        expect_rejected(j);
        // "TAP( 3 )" is accepted and stored canonically.
        j = tiny_pack();
        j["apps"][0]["rules"][0]["action"] = "TAP( 3 )";
        AppPack pack = pack_from(j);
        CHECK(pack.apps[0].rules[0].action == "tap(3)");
    }
    SUBCASE("task validation") {
        json j = tiny_pack();
        j["tasks"][0]["app"] = "nope";
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["risk"] = "extreme";
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["max_steps"] = 0;
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["success"]["conditions"] = json::array();
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["success"]["conditions"][0]["screen"] = "nowhere";
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["success"]["conditions"][0]["index"] = 9;
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"][0]["gold"][0]["do"] = "tap()";
        expect_rejected(j);
        j = tiny_pack();
        j["tasks"].push_back(j["tasks"][0]); // duplicate id
        expect_rejected(j);
    }
    SUBCASE("query tasks need a gold answer and a sane threshold") {
        json j = tiny_pack();
        j["tasks"][0]["kind"] = "query";
        j["tasks"][0]["success"] = json::object();
        expect_rejected(j);
        j["tasks"][0]["success"] = {{"gold_answer", "x"}, {"threshold", 1.5}};
        expect_rejected(j);
        j["tasks"][0]["success"] = {{"gold_answer", "x"}, {"threshold", 0.5}};
        AppPack pack = pack_from(j);
        CHECK(pack.tasks[0].answer_threshold == 0.5);
    }
    SUBCASE("invalid JSON is a config error, not a crash") {
        CHECK_THROWS_AS(parse_pack("{ not json", "test"), ConfigError);
    }
}

TEST_CASE("reset starts at the app's initial screen with zero steps") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    CHECK(state.current_screen_id == "s1");
    CHECK(state.t == 0);
    CHECK_FALSE(state.finished);
    CHECK_FALSE(state.terminated);
    CHECK_THROWS_AS(reset("missing", pack), ConfigError);
}

TEST_CASE("tapping a toggle flips its overlay state") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);

    StepFlags flags = apply(state, Action::tap(1), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
    CHECK(current_screen(state, pack).elements[0].state == "on");

    apply(state, Action::tap(1), pack, kNoBudget);
    CHECK(current_screen(state, pack).elements[0].state == "off");
    CHECK(state.t == 2);
}

TEST_CASE("tapping an input focuses it exclusively") {
    json j = tiny_pack();
    j["apps"][0]["screens"][0]["elements"].push_back(
        {{"index", 4}, {"kind", "input"}, {"label", "J"}});
    AppPack pack = pack_from(j);
    EpisodeState state = reset("k1", pack);

    apply(state, Action::tap(2), pack, kNoBudget);
    Screen view = current_screen(state, pack);
    CHECK(view.elements[1].focused);
    CHECK_FALSE(view.elements[3].focused);

    apply(state, Action::tap(4), pack, kNoBudget);
    view = current_screen(state, pack);
    CHECK_FALSE(view.elements[1].focused);
    CHECK(view.elements[3].focused);
}

TEST_CASE("text writes into the focused input") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);

    // No focus yet: the action is rejected and burns the step.
    StepFlags flags = apply(state, Action::text("hello"), pack, kNoBudget);
    CHECK(flags.ineffective);
    REQUIRE(flags.validation.has_value());
    CHECK(flags.validation->kind == ValidationError::Kind::NoFocusedField);
    CHECK(state.t == 1);

    apply(state, Action::tap(2), pack, kNoBudget);
    flags = apply(state, Action::text("hello"), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
    CHECK(current_screen(state, pack).elements[1].state == "hello");
}

TEST_CASE("actions on missing indices burn the step with a validation error") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    StepFlags flags = apply(state, Action::tap(9), pack, kNoBudget);
    CHECK(flags.ineffective);
    REQUIRE(flags.validation.has_value());
    CHECK(flags.validation->kind == ValidationError::Kind::NoSuchElement);
    CHECK(state.t == 1);
}

TEST_CASE("transition rules move between screens") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);

    StepFlags flags = apply(state, Action::tap(3), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
    CHECK(state.current_screen_id == "s2");

    // back uses the screen's back target.
    flags = apply(state, Action::back(), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
    CHECK(state.current_screen_id == "s1");

    // back with no target and no rule is ineffective.
    flags = apply(state, Action::back(), pack, kNoBudget);
    CHECK(flags.ineffective);
    CHECK(state.current_screen_id == "s1");
}

TEST_CASE("home returns to the initial screen when no home target is set") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    apply(state, Action::tap(3), pack, kNoBudget);
    REQUIRE(state.current_screen_id == "s2");
    StepFlags flags = apply(state, Action::home(), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
    CHECK(state.current_screen_id == "s1");
}

TEST_CASE("unmapped interactions are ineffective but still advance time") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);

    // Tapping a button with no transition rule does nothing.
    json j = tiny_pack();
    j["apps"][0]["rules"] = json::array();
    AppPack bare = pack_from(j);
    EpisodeState s2 = reset("k1", bare);
    StepFlags flags = apply(s2, Action::tap(3), bare, kNoBudget);
    CHECK(flags.ineffective);
    CHECK(s2.t == 1);

    // Swiping with no matching rule does nothing.
    flags = apply(state, Action::swipe(1, SwipeDirection::Up, SwipeDist::Short), pack, kNoBudget);
    CHECK(flags.ineffective);

    // wait is an intentional pause, not a failure signal.
    flags = apply(state, Action::wait(5), pack, kNoBudget);
    CHECK_FALSE(flags.ineffective);
}

TEST_CASE("finish records the message and stops the episode") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    apply(state, Action::finish("all done"), pack, kNoBudget);
    CHECK(state.finished);
    CHECK(state.finish_message == "all done");
}

TEST_CASE("the step budget terminates an unfinished episode") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    for (int i = 0; i < 3; ++i) apply(state, Action::wait(1), pack, 3);
    CHECK(state.terminated);
    CHECK(state.termination_reason == "step budget");

    // Finishing on the last budgeted step is not a termination.
    EpisodeState finishing = reset("k1", pack);
    apply(finishing, Action::wait(1), pack, 2);
    apply(finishing, Action::finish("done"), pack, 2);
    CHECK(finishing.finished);
    CHECK_FALSE(finishing.terminated);
}

TEST_CASE("advance_failed burns a step and flags the parse failure") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState state = reset("k1", pack);
    StepFlags flags = advance_failed(state, kNoBudget);
    CHECK(flags.ineffective);
    CHECK(flags.parse_failed);
    CHECK(state.t == 1);
}

TEST_CASE("render_screen_text covers every element shape") {
    Screen screen;
    screen.id = "x";
    screen.elements = {
        {1, ElementKind::Button, "Go", "", false},
        {2, ElementKind::Toggle, "Wi-Fi", "off", false},
        {3, ElementKind::Input, "Name", "abc", true},
        {4, ElementKind::ListItem, "Row", "", false},
        {5, ElementKind::Link, "Site", "", false},
        {6, ElementKind::Text, "Note", "", false},
    };
    CHECK(render_screen_text(screen) ==
          "1. button 'Go'\n"
          "2. toggle 'Wi-Fi' state=off\n"
          "3. input 'Name' state='abc' focused=true\n"
          "4. list_item 'Row'\n"
          "5. link 'Site'\n"
          "6. text 'Note'");

    Screen empty;
    CHECK(render_screen_text(empty) == "(no interactive elements)");
}

TEST_CASE("parse_screen_listing inverts render_screen_text") {
    Screen screen;
    screen.id = "x";
    screen.elements = {
        {1, ElementKind::Toggle, "Dark mode", "on", false},
        {2, ElementKind::Input, "Search", "it's here", true},
        {3, ElementKind::Button, "Menu", "", false},
    };
    auto parsed = parse_screen_listing(render_screen_text(screen));
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0] == screen.elements[0]);
    CHECK(parsed[1] == screen.elements[1]);
    CHECK(parsed[2] == screen.elements[2]);

    CHECK(parse_screen_listing("(no interactive elements)").empty());
    CHECK_THROWS_AS(parse_screen_listing("garbage line"), ConfigError);
    CHECK_THROWS_AS(parse_screen_listing("1. widget 'x'"), ConfigError);
}

TEST_CASE("every screen in the bundled pack survives the listing round trip") {
    AppPack pack = load_pack(kPackPath);
    for (const auto& app : pack.apps) {
        for (const auto& screen : app.screens) {
            auto parsed = parse_screen_listing(render_screen_text(screen));
            REQUIRE(parsed.size() == screen.elements.size());
            for (size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == screen.elements[i]);
        }
    }
}

TEST_CASE("evaluate requires finished before checking anything") {
    AppPack pack = pack_from(tiny_pack());
    const TaskSpec& task = pack.tasks[0];
    EpisodeState state = reset("k1", pack);
    apply(state, Action::tap(1), pack, kNoBudget); // toggle now on
    CHECK_FALSE(evaluate(task, state, pack));      // not finished yet
    apply(state, Action::finish("done"), pack, kNoBudget);
    CHECK(evaluate(task, state, pack));
}

TEST_CASE("operation success needs every condition to hold") {
    json j = tiny_pack();
    j["tasks"][0]["success"]["conditions"].push_back(
        {{"type", "current_screen"}, {"screen", "s2"}});
    AppPack pack = pack_from(j);
    const TaskSpec& task = pack.tasks[0];

    EpisodeState state = reset("k1", pack);
    apply(state, Action::tap(1), pack, kNoBudget);      // condition 1 holds
    apply(state, Action::finish("x"), pack, kNoBudget); // still on s1
    CHECK_FALSE(evaluate(task, state, pack));

    EpisodeState both = reset("k1", pack);
    apply(both, Action::tap(1), pack, kNoBudget);
    apply(both, Action::tap(3), pack, kNoBudget); // to s2
    apply(both, Action::finish("x"), pack, kNoBudget);
    CHECK(evaluate(task, both, pack));
}

TEST_CASE("query success compares the finish message against the gold answer") {
    json j = tiny_pack();
    j["tasks"][0]["kind"] = "query";
    j["tasks"][0]["success"] = {{"gold_answer", "founded in 1890"}};
    AppPack pack = pack_from(j);
    const TaskSpec& task = pack.tasks[0];

    EpisodeState exact = reset("k1", pack);
    apply(exact, Action::finish("Founded In 1890"), pack, kNoBudget);
    CHECK(evaluate(task, exact, pack)); // case-insensitive f1 = 1 >= 0.7

    EpisodeState partial = reset("k1", pack);
    apply(partial, Action::finish("the year 1890"), pack, kNoBudget);
    CHECK_FALSE(evaluate(task, partial, pack)); // f1 = 1/3 < 0.7

    EpisodeState wrong = reset("k1", pack);
    apply(wrong, Action::finish(""), pack, kNoBudget);
    CHECK_FALSE(evaluate(task, wrong, pack));
}

TEST_CASE("element state overlays never leak between episodes") {
    AppPack pack = pack_from(tiny_pack());
    EpisodeState first = reset("k1", pack);
    apply(first, Action::tap(1), pack, kNoBudget);
    CHECK(current_screen(first, pack).elements[0].state == "on");

    EpisodeState second = reset("k1", pack);
    CHECK(current_screen(second, pack).elements[0].state == "off");
    // The pack definition itself is untouched.
    CHECK(pack.apps[0].screens[0].elements[0].state == "off");
}
