#include "tandem/report.hpp"

#include <algorithm>
#include <cstdio>

#include "tandem/errors.hpp"

namespace tandem {

namespace {

std::string fixed(double value, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

}  // namespace

RunReport aggregate(std::string suite, std::vector<EpisodeResult> results,
                    const std::vector<EpisodeResult>* cloud_baseline) {
    RunReport report;
    report.suite = std::move(suite);
    std::sort(results.begin(), results.end(),
              [](const EpisodeResult& a, const EpisodeResult& b) {
                  return a.task_id < b.task_id;
              });
    for (size_t i = 1; i < results.size(); ++i)
        if (results[i].task_id == results[i - 1].task_id)
            throw ConfigError("duplicate task in results: " + results[i].task_id);

    for (const auto& result : results) {
        report.tasks += 1;
        if (result.success) report.successes += 1;
        report.total_steps += result.total_steps;
        report.device_steps += result.device_steps;
        report.cloud_steps += result.cloud_steps;
        report.monitor_calls += result.monitor_calls;
    }
    report.success_rate = report.tasks ? double(report.successes) / report.tasks : 0.0;
    long long attributed = report.device_steps + report.cloud_steps;
    if (attributed > 0) {
        report.device_step_share = double(report.device_steps) / attributed;
        report.cloud_step_share = double(report.cloud_steps) / attributed;
    }

    if (cloud_baseline) {
        std::vector<std::string> ours, theirs;
        for (const auto& r : results) ours.push_back(r.task_id);
        for (const auto& r : *cloud_baseline) theirs.push_back(r.task_id);
        std::sort(theirs.begin(), theirs.end());
        if (ours != theirs)
            throw ConfigError("cloud_steps_saved needs identical task sets in both runs");
        long long baseline_cloud = 0;
        for (const auto& r : *cloud_baseline) baseline_cloud += r.cloud_steps;
        if (baseline_cloud == 0)
            throw ConfigError("cloud-only baseline has no cloud steps");
        report.cloud_steps_saved = 1.0 - double(report.cloud_steps) / double(baseline_cloud);
    }

    report.per_task = std::move(results);
    return report;
}

std::string format_report_table(const RunReport& report) {
    std::string out;
    out += "suite: " + report.suite + "\n";
    out += "tasks: " + std::to_string(report.tasks) +
           "  successes: " + std::to_string(report.successes) +
           "  success_rate: " + fixed(report.success_rate) + "\n";
    out += "steps: total " + std::to_string(report.total_steps) + ", device " +
           std::to_string(report.device_steps) + " (" + fixed(report.device_step_share) +
           "), cloud " + std::to_string(report.cloud_steps) + " (" +
           fixed(report.cloud_step_share) + ")\n";
    out += "monitor_calls: " + std::to_string(report.monitor_calls) + "\n";
    if (report.cloud_steps_saved)
        out += "cloud_steps_saved: " + fixed(*report.cloud_steps_saved) + "\n";

    size_t width = 4;
    for (const auto& r : report.per_task) width = std::max(width, r.task_id.size());
    out += "\n";
    out += "task";
    out.append(width - 4 + 2, ' ');
    out += "ok  steps  device  cloud  switched_at  termination\n";
    for (const auto& r : report.per_task) {
        out += r.task_id;
        out.append(width - r.task_id.size() + 2, ' ');
        std::string switched = r.switched_at ? std::to_string(*r.switched_at) : "-";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-4s%-7d%-8d%-7d%-13s", r.success ? "yes" : "no",
                      r.total_steps, r.device_steps, r.cloud_steps, switched.c_str());
        out += buf;
        out += r.termination;
        out += "\n";
    }
    return out;
}

std::string format_report_tsv(const RunReport& report) {
    std::string out =
        "task\tsuccess\ttotal_steps\tdevice_steps\tcloud_steps\tmonitor_calls\t"
        "switched_at\ttermination\n";
    for (const auto& r : report.per_task) {
        out += r.task_id;
        out += '\t';
        out += r.success ? "1" : "0";
        out += '\t';
        out += std::to_string(r.total_steps);
        out += '\t';
        out += std::to_string(r.device_steps);
        out += '\t';
        out += std::to_string(r.cloud_steps);
        out += '\t';
        out += std::to_string(r.monitor_calls);
        out += '\t';
        out += r.switched_at ? std::to_string(*r.switched_at) : "-";
        out += '\t';
        out += r.termination;
        out += '\n';
    }
    return out;
}

}  // namespace tandem
