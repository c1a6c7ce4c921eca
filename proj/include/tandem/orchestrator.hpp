#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tandem/backend.hpp"
#include "tandem/env.hpp"
#include "tandem/protocol.hpp"

namespace tandem {

// When to start polling the switch check and how often afterwards.
struct MonitorPlan {
    int monitor_start = 0;
    int monitor_every = 1;

    bool operator==(const MonitorPlan&) const = default;
};

enum class DecisionMode { Rules, Model };
enum class Verdict { Device, Cloud };
enum class SwitchBasis { RuleRepetition, RuleNoProgress, RuleQuality, ModelVerdict };

std::string to_string(DecisionMode mode);
std::string to_string(Verdict verdict);
std::string to_string(SwitchBasis basis);

struct SwitchDecision {
    Verdict verdict = Verdict::Device;
    // Which signal produced the verdict; empty when no rule fired.
    std::optional<SwitchBasis> basis;
    std::string detail;
};

// Everything recorded about one executed step.
struct StepRecord {
    int t = 0;
    Tier tier = Tier::Device;
    std::string backend;
    std::string raw;
    std::optional<Action> action;
    std::string action_text;  // canonical render, or the literal call text when unparseable
    ConformityReport conformity;
    std::string screen_before;
    std::string screen_after;
    bool monitor_fired = false;
    std::optional<SwitchDecision> switch_decision;
    StepFlags flags;
    int retries = 0;
    double wall_ms = 0.0;
};

struct EpisodeResult {
    std::string task_id;
    bool success = false;
    int total_steps = 0;
    int device_steps = 0;
    int cloud_steps = 0;
    int monitor_calls = 0;
    std::optional<int> switched_at;
    std::string termination;  // "finished", "step budget", or "backend failure: ..."
};

enum class Arm { Collaborative, CloudOnly, DeviceOnly };

std::string to_string(Arm arm);

struct OrchestratorConfig {
    Arm arm = Arm::Collaborative;
    DecisionMode assessor_mode = DecisionMode::Rules;
    DecisionMode switcher_mode = DecisionMode::Rules;
    std::optional<MonitorPlan> plan_override;
    int history_window = 16;
    bool deterministic = false;  // zero out wall-clock fields
    // Model-mode plan/switch prompts go to this backend; the episode's cloud
    // backend is used when unset.
    ModelBackend* decision_backend = nullptr;
};

struct EpisodeOutcome {
    EpisodeResult result;
    std::vector<StepRecord> steps;
    MonitorPlan plan;
    bool plan_fallback = false;  // model plan was unreadable, rules plan used
    EpisodeState final_state;
};

// Maps task risk to a monitoring plan; in model mode it asks the backend and
// falls back to the rules tiers when the reply cannot be parsed.
MonitorPlan assess_complexity(const TaskSpec& task, DecisionMode mode,
                              ModelBackend* backend, bool* used_fallback = nullptr);

// True when the switch check should run before the step at time t.
bool should_monitor(int t, const MonitorPlan& plan, bool switched);

// Switch verdict from the trailing step records (rules mode) or from one
// backend call (model mode).
SwitchDecision decide_switch(const std::vector<StepRecord>& steps, DecisionMode mode,
                             ModelBackend* backend, const TaskSpec& task,
                             const std::string& screen_text,
                             const std::string& history_text);

EpisodeOutcome run_episode(const TaskSpec& task, const AppPack& pack,
                           ModelBackend& device, ModelBackend& cloud,
                           const OrchestratorConfig& config);

}  // namespace tandem
