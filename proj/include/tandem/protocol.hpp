#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace tandem {

// The structured step summary appended to history: interface state, task
// progress, next action, expected outcome, potential issues.
struct StateAssessment {
    std::string current_state;
    std::string task_progress;
    std::string next_required_action;
    std::string expected_outcome;
    std::string potential_issues;

    bool operator==(const StateAssessment&) const = default;
};

// A model's raw output split into the three template blocks. `raw` is kept
// byte-exactly for tracing and reward computation.
struct AgentTurn {
    std::string reasoning;
    StateAssessment assessment;
    std::string call_text;
    std::string raw;
};

// Format-conformity counts feeding the format reward.
//   k: well-formed blocks present (0..3)
//   c: non-whitespace characters outside every recognized block
struct ConformityReport {
    int k = 0;
    long long c = 0;
    std::array<bool, 3> blocks_present{false, false, false}; // reasoning, assessment, call
    bool out_of_order = false;
};

struct ParsedTurn {
    AgentTurn turn;
    ConformityReport report;
};

// Total function over arbitrary model output: malformation is data, not an
// error, so it can flow into the format reward. Only the first occurrence of
// each block counts toward k; duplicates count toward c.
ParsedTurn parse_turn(std::string_view raw);

// Assessment verbatim when the STATE_ASSESSMENT block was present; otherwise
// synthesized from the first 200 characters of reasoning, remaining fields
// "unknown".
StateAssessment summarize_for_history(const ParsedTurn& parsed);

// Emits the exact three-block template text. parse_turn of the result yields
// k=3, c=0 and the same fields back.
std::string render_turn(const std::string& reasoning, const StateAssessment& a,
                        const std::string& call_text);

// Ordered segmentation of `raw` into recognized-block spans and outside
// remainder; concatenating the pieces reconstructs raw byte-exactly.
struct TurnSegment {
    bool inside_block = false;
    std::string text;
};
std::vector<TurnSegment> segment_turn(std::string_view raw);

} // namespace tandem
