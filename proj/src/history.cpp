#include "tandem/history.hpp"

#include "tandem/errors.hpp"

#include <algorithm>

namespace tandem {

namespace {

std::string one_line(const std::string& s) {
    std::string out = s;
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

} // namespace

History::History(int window) : window_(window) {
    if (window < kMinWindow || window > kMaxWindow)
        throw ConfigError("history window must be in [" + std::to_string(kMinWindow) + ", " +
                          std::to_string(kMaxWindow) + "], got " + std::to_string(window));
}

void History::append(const StateAssessment& a, const std::string& action_text) {
    Entry e;
    e.step = static_cast<int>(entries_.size());
    e.assessment = a;
    e.action_text = action_text;
    entries_.push_back(std::move(e));
}

std::string History::render() const {
    if (entries_.empty()) return "No history yet.";

    size_t count = std::min(entries_.size(), static_cast<size_t>(window_));
    size_t first = entries_.size() - count;
    std::string out;
    for (size_t i = first; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (!out.empty()) out += "\n";
        out += "Step " + std::to_string(e.step) + ": ";
        out += "Current State: " + one_line(e.assessment.current_state);
        out += " | Task Progress: " + one_line(e.assessment.task_progress);
        out += " | Next Required Action: " + one_line(e.assessment.next_required_action);
        out += " | Expected Outcome: " + one_line(e.assessment.expected_outcome);
        out += " | Potential Issues: " + one_line(e.assessment.potential_issues);
        out += " | Action: " + one_line(e.action_text);
    }
    return out;
}

} // namespace tandem
