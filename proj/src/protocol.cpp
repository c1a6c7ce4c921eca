#include "tandem/protocol.hpp"

#include <algorithm>
#include <cctype>

namespace tandem {

namespace {

struct BlockTag {
    std::string_view open;
    std::string_view close;
};

// Template order: reasoning, assessment, called function. Tag matching is
// case-sensitive and exact; training data is generated from this template.
constexpr std::array<BlockTag, 3> kTags = {{
    {"<REASONING>", "</REASONING>"},
    {"<STATE_ASSESSMENT>", "</STATE_ASSESSMENT>"},
    {"<CALLED_FUNCTION>", "</CALLED_FUNCTION>"},
}};

struct BlockSpan {
    bool found = false;
    size_t begin = 0;       // offset of '<' in the open tag
    size_t end = 0;         // offset one past '>' of the close tag
    size_t content_begin = 0;
    size_t content_end = 0;
};

BlockSpan find_block(std::string_view raw, const BlockTag& tag) {
    BlockSpan span;
    size_t open = raw.find(tag.open);
    if (open == std::string_view::npos) return span;
    size_t close = raw.find(tag.close, open + tag.open.size());
    if (close == std::string_view::npos) return span;
    span.found = true;
    span.begin = open;
    span.content_begin = open + tag.open.size();
    span.content_end = close;
    span.end = close + tag.close.size();
    return span;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

constexpr std::array<std::string_view, 5> kAssessmentLabels = {
    "Current State:", "Task Progress:", "Next Required Action:",
    "Expected Outcome:", "Potential Issues:"};

// Assessment lines are matched by their labels; unlabeled content goes to
// current_state.
StateAssessment parse_assessment(std::string_view body) {
    std::array<std::string, 5> fields;

    size_t pos = 0;
    while (pos <= body.size()) {
        size_t nl = body.find('\n', pos);
        std::string_view line = body.substr(pos, nl == std::string_view::npos ? body.size() - pos
                                                                              : nl - pos);
        std::string_view rest = line;
        size_t indent = 0;
        while (indent < rest.size() &&
               (std::isspace(static_cast<unsigned char>(rest[indent])) || rest[indent] == '-'))
            ++indent;
        rest.remove_prefix(indent);

        int target = 0; // unlabeled lines land in current_state
        std::string value = trim(line);
        for (size_t i = 0; i < kAssessmentLabels.size(); ++i) {
            if (rest.substr(0, kAssessmentLabels[i].size()) == kAssessmentLabels[i]) {
                target = static_cast<int>(i);
                value = trim(rest.substr(kAssessmentLabels[i].size()));
                break;
            }
        }
        if (!value.empty()) {
            if (!fields[target].empty()) fields[target] += " ";
            fields[target] += value;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }

    StateAssessment a;
    a.current_state = fields[0];
    a.task_progress = fields[1];
    a.next_required_action = fields[2];
    a.expected_outcome = fields[3];
    a.potential_issues = fields[4];
    return a;
}

std::array<BlockSpan, 3> recognized_spans(std::string_view raw) {
    std::array<BlockSpan, 3> spans;
    for (size_t i = 0; i < kTags.size(); ++i) spans[i] = find_block(raw, kTags[i]);
    return spans;
}

} // namespace

std::vector<TurnSegment> segment_turn(std::string_view raw) {
    auto spans = recognized_spans(raw);

    // Merge recognized spans into a sorted union so overlapping or nested
    // blocks still yield a clean partition of raw.
    std::vector<std::pair<size_t, size_t>> ranges;
    for (const auto& s : spans)
        if (s.found) ranges.emplace_back(s.begin, s.end);
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<size_t, size_t>> merged;
    for (auto& r : ranges) {
        if (!merged.empty() && r.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, r.second);
        else
            merged.push_back(r);
    }

    std::vector<TurnSegment> segments;
    size_t pos = 0;
    for (auto& [b, e] : merged) {
        if (b > pos) segments.push_back({false, std::string(raw.substr(pos, b - pos))});
        segments.push_back({true, std::string(raw.substr(b, e - b))});
        pos = e;
    }
    if (pos < raw.size()) segments.push_back({false, std::string(raw.substr(pos))});
    return segments;
}

ParsedTurn parse_turn(std::string_view raw) {
    ParsedTurn out;
    out.turn.raw = std::string(raw);

    auto spans = recognized_spans(raw);

    ConformityReport& report = out.report;
    for (size_t i = 0; i < spans.size(); ++i) {
        report.blocks_present[i] = spans[i].found;
        if (spans[i].found) ++report.k;
    }

    // Out-of-order: present blocks whose open tags are not in template order.
    size_t last = 0;
    bool first = true;
    for (const auto& s : spans) {
        if (!s.found) continue;
        if (!first && s.begin < last) report.out_of_order = true;
        last = s.begin;
        first = false;
    }

    for (const auto& seg : segment_turn(raw)) {
        if (seg.inside_block) continue;
        for (char c : seg.text)
            if (!std::isspace(static_cast<unsigned char>(c))) ++report.c;
    }

    if (spans[0].found)
        out.turn.reasoning =
            trim(raw.substr(spans[0].content_begin, spans[0].content_end - spans[0].content_begin));
    if (spans[1].found)
        out.turn.assessment = parse_assessment(
            raw.substr(spans[1].content_begin, spans[1].content_end - spans[1].content_begin));
    if (spans[2].found)
        out.turn.call_text =
            trim(raw.substr(spans[2].content_begin, spans[2].content_end - spans[2].content_begin));
    return out;
}

StateAssessment summarize_for_history(const ParsedTurn& parsed) {
    if (parsed.report.blocks_present[1]) return parsed.turn.assessment;

    StateAssessment a;
    std::string head = parsed.turn.reasoning.substr(0, 200);
    a.current_state = head.empty() ? "unknown" : head;
    a.task_progress = "unknown";
    a.next_required_action = "unknown";
    a.expected_outcome = "unknown";
    a.potential_issues = "unknown";
    return a;
}

std::string render_turn(const std::string& reasoning, const StateAssessment& a,
                        const std::string& call_text) {
    std::string out;
    out += "<REASONING>\n";
    out += reasoning;
    out += "\n</REASONING>\n\n";
    out += "<STATE_ASSESSMENT>\n";
    out += "Current State: " + a.current_state + "\n";
    out += "Task Progress: " + a.task_progress + "\n";
    out += "Next Required Action: " + a.next_required_action + "\n";
    out += "Expected Outcome: " + a.expected_outcome + "\n";
    out += "Potential Issues: " + a.potential_issues + "\n";
    out += "</STATE_ASSESSMENT>\n\n";
    out += "<CALLED_FUNCTION>\n";
    out += call_text;
    out += "\n</CALLED_FUNCTION>";
    return out;
}

} // namespace tandem
