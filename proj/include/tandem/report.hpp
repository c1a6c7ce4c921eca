#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tandem/orchestrator.hpp"

namespace tandem {

struct RunReport {
    std::string suite;
    std::vector<EpisodeResult> per_task;  // sorted by task id
    int tasks = 0;
    int successes = 0;
    double success_rate = 0.0;
    long long total_steps = 0;
    long long device_steps = 0;
    long long cloud_steps = 0;
    double device_step_share = 0.0;
    double cloud_step_share = 0.0;
    long long monitor_calls = 0;
    // 1 - (cloud steps here / cloud steps of the cloud-only baseline);
    // only set when a baseline over the same task set is supplied.
    std::optional<double> cloud_steps_saved;
};

RunReport aggregate(std::string suite, std::vector<EpisodeResult> results,
                    const std::vector<EpisodeResult>* cloud_baseline = nullptr);

// Fixed-width human table and machine TSV, both ending in a newline.
std::string format_report_table(const RunReport& report);
std::string format_report_tsv(const RunReport& report);

}  // namespace tandem
