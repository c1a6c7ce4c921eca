#pragma once

#include <string>
#include <vector>

#include "tandem/env.hpp"
#include "tandem/orchestrator.hpp"

namespace tandem {

// First line of every trace file.
struct TraceHeader {
    int version = 1;
    std::string suite;
    std::string task_id;
    std::string pack_id;
    uint64_t pack_hash = 0;
    uint64_t seed = 0;
    Arm arm = Arm::Collaborative;
    MonitorPlan plan;
    bool plan_fallback = false;
    DecisionMode assessor_mode = DecisionMode::Rules;
    DecisionMode switcher_mode = DecisionMode::Rules;
    bool deterministic = false;
};

struct LoadedTrace {
    TraceHeader header;
    std::vector<StepRecord> steps;
    EpisodeResult result;
};

// One JSON object per line: header, then steps, then the result.
// Keys serialize alphabetically, so byte-identical inputs give
// byte-identical files.
std::string trace_to_jsonl(const TraceHeader& header, const std::vector<StepRecord>& steps,
                           const EpisodeResult& result);
void write_trace(const std::string& path, const TraceHeader& header,
                 const std::vector<StepRecord>& steps, const EpisodeResult& result);

LoadedTrace parse_trace(std::string_view jsonl, std::string_view source_name);
LoadedTrace read_trace(const std::string& path);

struct ReplayVerdict {
    bool match = true;
    std::string divergence;  // empty when match
};

// Re-applies the traced actions against the pack and compares screens,
// flags, and the final result.
ReplayVerdict replay_trace(const LoadedTrace& trace, const AppPack& pack);
ReplayVerdict replay_file(const std::string& path, const AppPack& pack);

}  // namespace tandem
