#pragma once

#include "tandem/protocol.hpp"

#include <string>
#include <vector>

namespace tandem {

// Append-only textual memory: one entry per completed step, rendered into the
// prompt with a bounded window so prompt length never grows with episode
// length. A History value is owned by exactly one episode.
class History {
public:
    struct Entry {
        int step = 0;
        StateAssessment assessment;
        std::string action_text; // canonical call of the executed action
    };

    static constexpr int kDefaultWindow = 16;
    static constexpr int kMinWindow = 1;
    static constexpr int kMaxWindow = 64;

    explicit History(int window = kDefaultWindow);

    // Grows the sequence by exactly one entry; prior entries are never
    // mutated. Entry steps are consecutive from 0.
    void append(const StateAssessment& a, const std::string& action_text);

    // Deterministic listing of the last min(size, window) entries, one line
    // per entry. Empty history renders as "No history yet."
    std::string render() const;

    const std::vector<Entry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    int window() const { return window_; }

private:
    std::vector<Entry> entries_;
    int window_;
};

} // namespace tandem
