#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tandem/backend.hpp"
#include "tandem/orchestrator.hpp"
#include "tandem/report.hpp"

namespace tandem {

// How one model slot (device or cloud) is realized.
struct BackendBinding {
    enum class Type { Gold, GoldPrefixLoop, Script, Remote };
    Type type = Type::Gold;
    int prefix = 1;                      // GoldPrefixLoop
    std::vector<std::string> turns;      // Script
    ScriptedBackend::ExhaustPolicy exhausted = ScriptedBackend::ExhaustPolicy::RepeatLast;
    RemoteConfig remote;                 // Remote
};

struct SuiteConfig {
    std::string suite;
    std::string pack_path;
    std::vector<std::string> task_filter;  // empty = every task in the pack
    Arm arm = Arm::Collaborative;
    BackendBinding device;
    BackendBinding cloud;
    DecisionMode assessor_mode = DecisionMode::Rules;
    DecisionMode switcher_mode = DecisionMode::Rules;
    std::optional<MonitorPlan> plan_override;
    int history_window = 16;
    int parallel = 1;
    uint64_t seed = 0;
    bool deterministic = false;
    std::string out_dir = "out";
};

SuiteConfig load_suite_config(const std::string& path);
SuiteConfig parse_suite_config(std::string_view json_text, std::string_view source_name);

// Fresh backend per episode so scripted cursors and gold prefixes never leak
// across tasks.
std::unique_ptr<ModelBackend> make_backend(const BackendBinding& binding, Tier tier,
                                           const TaskSpec& task);

struct SuiteRun {
    RunReport report;
    std::vector<std::string> trace_files;
};

// Runs every selected task, writes one trace per episode plus report.txt and
// report.tsv under out_dir, and returns the aggregated report.
SuiteRun run_suite(const SuiteConfig& config, const AppPack& pack);

struct BenchRun {
    RunReport device_only;
    RunReport cloud_only;
    RunReport collaborative;  // includes cloud_steps_saved vs the cloud-only arm
};

// Runs the three arms over the same tasks; traces land in per-arm
// subdirectories of config.out_dir.
BenchRun run_bench(const SuiteConfig& config, const AppPack& pack);

std::string format_bench_summary(const BenchRun& bench);

}  // namespace tandem
