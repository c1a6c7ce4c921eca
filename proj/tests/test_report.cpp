#include "doctest.h"

#include "tandem/errors.hpp"
#include "tandem/report.hpp"

#include <string>
#include <vector>

using namespace tandem;

namespace {

EpisodeResult result(std::string id, bool success, int total, int device, int cloud,
                     int monitor, std::optional<int> switched, std::string termination) {
    EpisodeResult r;
    r.task_id = std::move(id);
    r.success = success;
    r.total_steps = total;
    r.device_steps = device;
    r.cloud_steps = cloud;
    r.monitor_calls = monitor;
    r.switched_at = switched;
    r.termination = std::move(termination);
    return r;
}

std::vector<EpisodeResult> sample_results() {
    return {
        result("zeta", true, 5, 3, 2, 2, 3, "finished"),
        result("alpha", false, 25, 25, 0, 0, std::nullopt, "step budget"),
        result("mid", true, 4, 0, 4, 1, std::nullopt, "finished"),
    };
}

std::vector<EpisodeResult> cloud_baseline() {
    return {
        result("alpha", true, 10, 0, 10, 0, std::nullopt, "finished"),
        result("mid", true, 4, 0, 4, 0, std::nullopt, "finished"),
        result("zeta", true, 6, 0, 6, 0, std::nullopt, "finished"),
    };
}

} // namespace

TEST_CASE("aggregate sums counters and sorts per-task rows") {
    RunReport report = aggregate("demo", sample_results());
    CHECK(report.suite == "demo");
    CHECK(report.tasks == 3);
    CHECK(report.successes == 2);
    CHECK(report.success_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.total_steps == 34);
    CHECK(report.device_steps == 28);
    CHECK(report.cloud_steps == 6);
    CHECK(report.monitor_calls == 3);
    CHECK(report.device_step_share == doctest::Approx(28.0 / 34.0).epsilon(1e-12));
    CHECK(report.cloud_step_share == doctest::Approx(6.0 / 34.0).epsilon(1e-12));
    CHECK_FALSE(report.cloud_steps_saved.has_value());

    REQUIRE(report.per_task.size() == 3);
    CHECK(report.per_task[0].task_id == "alpha");
    CHECK(report.per_task[1].task_id == "mid");
    CHECK(report.per_task[2].task_id == "zeta");
}

TEST_CASE("aggregating nothing stays at zero without dividing by it") {
    RunReport report = aggregate("empty", {});
    CHECK(report.tasks == 0);
    CHECK(report.success_rate == 0.0);
    CHECK(report.device_step_share == 0.0);
    CHECK(report.cloud_step_share == 0.0);
}

TEST_CASE("duplicate task ids in one run are rejected") {
    auto results = sample_results();
    results.push_back(result("mid", true, 1, 1, 0, 0, std::nullopt, "finished"));
    CHECK_THROWS_WITH_AS(aggregate("demo", results),
                         "duplicate task in results: mid", ConfigError);
}

TEST_CASE("the baseline comparison computes cloud steps saved") {
    auto baseline = cloud_baseline();
    RunReport report = aggregate("demo", sample_results(), &baseline);
    REQUIRE(report.cloud_steps_saved.has_value());
    // 6 collaborative cloud steps against a 20-step cloud-only baseline.
    CHECK(*report.cloud_steps_saved == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("the baseline must cover exactly the same tasks") {
    auto baseline = cloud_baseline();
    baseline.pop_back();
    CHECK_THROWS_WITH_AS(aggregate("demo", sample_results(), &baseline),
                         "cloud_steps_saved needs identical task sets in both runs",
                         ConfigError);

    baseline = cloud_baseline();
    baseline[0].task_id = "omega";
    CHECK_THROWS_AS(aggregate("demo", sample_results(), &baseline), ConfigError);
}

TEST_CASE("an all-device baseline cannot anchor the savings ratio") {
    auto baseline = cloud_baseline();
    for (auto& r : baseline) r.cloud_steps = 0;
    CHECK_THROWS_WITH_AS(aggregate("demo", sample_results(), &baseline),
                         "cloud-only baseline has no cloud steps", ConfigError);
}

TEST_CASE("the human table carries the headline numbers and one row per task") {
    auto baseline = cloud_baseline();
    RunReport report = aggregate("demo", sample_results(), &baseline);
    std::string table = format_report_table(report);

    CHECK(table.rfind("suite: demo\n", 0) == 0);
    CHECK(table.find("tasks: 3  successes: 2  success_rate: 0.6667\n") != std::string::npos);
    CHECK(table.find("steps: total 34, device 28 (0.8235), cloud 6 (0.1765)\n") !=
          std::string::npos);
    CHECK(table.find("monitor_calls: 3\n") != std::string::npos);
    CHECK(table.find("cloud_steps_saved: 0.7000\n") != std::string::npos);
    // Column layout is fixed-width, so a full row can be pinned byte for byte.
    CHECK(table.find("zeta   yes 5      3       2      3            finished\n") !=
          std::string::npos);
    CHECK(table.find("alpha  no  25     25      0      -            step budget\n") !=
          std::string::npos);
    CHECK(table.back() == '\n');
}

TEST_CASE("the tsv dump is byte-stable") {
    RunReport report = aggregate("demo", sample_results());
    std::string expected =
        "task\tsuccess\ttotal_steps\tdevice_steps\tcloud_steps\tmonitor_calls\t"
        "switched_at\ttermination\n"
        "alpha\t0\t25\t25\t0\t0\t-\tstep budget\n"
        "mid\t1\t4\t0\t4\t1\t-\tfinished\n"
        "zeta\t1\t5\t3\t2\t2\t3\tfinished\n";
    CHECK(format_report_tsv(report) == expected);
}
