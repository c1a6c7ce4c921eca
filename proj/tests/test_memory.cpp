#include "doctest.h"

#include "tandem/errors.hpp"
#include "tandem/history.hpp"
#include "tandem/similarity.hpp"

#include <string>

using namespace tandem;

namespace {

StateAssessment assessment_for(int i) {
    StateAssessment a;
    a.current_state = "state " + std::to_string(i);
    a.task_progress = "progress " + std::to_string(i);
    a.next_required_action = "tap(" + std::to_string(i + 1) + ")";
    a.expected_outcome = "outcome " + std::to_string(i);
    a.potential_issues = "none";
    return a;
}

} // namespace

TEST_CASE("empty history renders a fixed placeholder") {
    History h;
    CHECK(h.render() == "No history yet.");
    CHECK(h.size() == 0);
}

TEST_CASE("entries are numbered consecutively from zero") {
    History h;
    h.append(assessment_for(0), "tap(1)");
    h.append(assessment_for(1), "tap(2)");
    REQUIRE(h.size() == 2);
    CHECK(h.entries()[0].step == 0);
    CHECK(h.entries()[1].step == 1);
    CHECK(h.entries()[1].action_text == "tap(2)");
}

TEST_CASE("render shows one line per entry with all five fields") {
    History h;
    h.append(assessment_for(0), "tap(1)");
    std::string line = h.render();
    CHECK(line ==
          "Step 0: Current State: state 0 | Task Progress: progress 0"
          " | Next Required Action: tap(1) | Expected Outcome: outcome 0"
          " | Potential Issues: none | Action: tap(1)");
}

TEST_CASE("render keeps only the trailing window") {
    History h(4);
    for (int i = 0; i < 20; ++i) h.append(assessment_for(i), "tap(1)");

    std::string text = h.render();
    // Entries 16..19 survive; the window drops everything earlier.
    CHECK(text.find("Step 15:") == std::string::npos);
    CHECK(text.find("Step 16:") != std::string::npos);
    CHECK(text.find("Step 19:") != std::string::npos);

    int lines = 1;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 4);
}

TEST_CASE("earlier entries are never mutated by later appends") {
    History h(2);
    h.append(assessment_for(0), "tap(1)");
    History::Entry first = h.entries()[0];
    for (int i = 1; i < 10; ++i) h.append(assessment_for(i), "back()");
    CHECK(h.entries()[0].step == first.step);
    CHECK(h.entries()[0].assessment == first.assessment);
    CHECK(h.entries()[0].action_text == first.action_text);
    CHECK(h.size() == 10);
}

TEST_CASE("newlines inside fields cannot break the one-line-per-entry shape") {
    History h;
    StateAssessment a = assessment_for(0);
    a.current_state = "line one\nline two";
    h.append(a, "tap(1)");
    std::string text = h.render();
    CHECK(text.find('\n') == std::string::npos);
    CHECK(text.find("line one line two") != std::string::npos);
}

TEST_CASE("window bounds are enforced at construction") {
    CHECK_THROWS_AS(History(0), ConfigError);
    CHECK_THROWS_AS(History(-3), ConfigError);
    CHECK_THROWS_AS(History(65), ConfigError);
    CHECK_NOTHROW(History(1));
    CHECK_NOTHROW(History(64));
}

TEST_CASE("token_f1 scores identical and disjoint answers at the extremes") {
    CHECK(token_f1("founded in 1890", "founded in 1890") == 1.0);
    CHECK(token_f1("alpha beta", "gamma delta") == 0.0);
    CHECK(token_f1("", "") == 1.0);
    CHECK(token_f1("", "something") == 0.0);
    CHECK(token_f1("something", "") == 0.0);
}

TEST_CASE("token_f1 is case and whitespace insensitive") {
    CHECK(token_f1("Founded In 1890", "founded in 1890") == 1.0);
    CHECK(token_f1("  founded\tin\n1890 ", "founded in 1890") == 1.0);
}

TEST_CASE("token_f1 matches a hand-computed partial overlap") {
    // predicted "the year 1890", gold "founded in 1890": overlap 1 token,
    // precision 1/3, recall 1/3, f1 = 1/3.
    CHECK(token_f1("the year 1890", "founded in 1890") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // predicted "a a b", gold "a b b": multiset overlap is one 'a' plus one
    // 'b', so precision = recall = 2/3 and f1 = 2/3.
    CHECK(token_f1("a a b", "a b b") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("token_f1 is symmetric in precision and recall roles") {
    double ab = token_f1("one two three four", "one two");
    // overlap 2, precision 2/4, recall 2/2 -> f1 = 2*0.5*1/(1.5) = 2/3.
    CHECK(ab == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("similarity registry resolves the built-in and rejects unknown ids") {
    SimilarityFn fn = similarity_by_id("token_f1");
    CHECK(fn("x y", "x y") == 1.0);
    CHECK_THROWS_AS(similarity_by_id("embedding_cosine"), ConfigError);

    register_similarity("always_half", [](std::string_view, std::string_view) { return 0.5; });
    CHECK(similarity_by_id("always_half")("a", "b") == 0.5);
}
