#include "doctest.h"

#include "tandem/env.hpp"
#include "tandem/errors.hpp"
#include "tandem/suite.hpp"
#include "tandem/trace.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace tandem;

namespace {

constexpr const char* kPackPath = "packs/mock_suite.json";

const AppPack& pack() {
    static AppPack p = load_pack(kPackPath);
    return p;
}

SuiteConfig parse(const std::string& text) { return parse_suite_config(text, "test"); }

void expect_rejected(const std::string& text, const std::string& needle) {
    try {
        parse(text);
        FAIL_CHECK("config accepted: " << text);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

const char* kMinimal = R"({
  "suite": "s",
  "pack": "packs/mock_suite.json",
  "device": {"type": "gold"},
  "cloud": {"type": "gold"}
})";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("a minimal config picks the documented defaults") {
    SuiteConfig config = parse(kMinimal);
    CHECK(config.suite == "s");
    CHECK(config.pack_path == "packs/mock_suite.json");
    CHECK(config.task_filter.empty());
    CHECK(config.arm == Arm::Collaborative);
    CHECK(config.device.type == BackendBinding::Type::Gold);
    CHECK(config.cloud.type == BackendBinding::Type::Gold);
    CHECK(config.assessor_mode == DecisionMode::Rules);
    CHECK(config.switcher_mode == DecisionMode::Rules);
    CHECK_FALSE(config.plan_override.has_value());
    CHECK(config.history_window == 16);
    CHECK(config.parallel == 1);
    CHECK(config.seed == 0);
    CHECK_FALSE(config.deterministic);
    CHECK(config.out_dir == "out");
}

TEST_CASE("every config field round-trips from JSON") {
    SuiteConfig config = parse(R"({
      "suite": "full",
      "pack": "packs/mock_suite.json",
      "tasks": ["settings_wifi_on", "settings_bt_on"],
      "arm": "cloud_only",
      "device": {"type": "gold_prefix_loop", "prefix": 2},
      "cloud": {"type": "script", "turns": ["a", "b"], "exhausted": "error"},
      "assessor_mode": "model",
      "switcher_mode": "model",
      "plan_override": {"monitor_start": 3, "monitor_every": 2},
      "history_window": 8,
      "parallel": 4,
      "seed": 99,
      "deterministic": true,
      "out_dir": "out/elsewhere"
    })");
    CHECK(config.suite == "full");
    CHECK(config.task_filter == std::vector<std::string>{"settings_wifi_on", "settings_bt_on"});
    CHECK(config.arm == Arm::CloudOnly);
    CHECK(config.device.type == BackendBinding::Type::GoldPrefixLoop);
    CHECK(config.device.prefix == 2);
    CHECK(config.cloud.type == BackendBinding::Type::Script);
    CHECK(config.cloud.turns == std::vector<std::string>{"a", "b"});
    CHECK(config.cloud.exhausted == ScriptedBackend::ExhaustPolicy::Error);
    CHECK(config.assessor_mode == DecisionMode::Model);
    CHECK(config.switcher_mode == DecisionMode::Model);
    REQUIRE(config.plan_override.has_value());
    CHECK(*config.plan_override == MonitorPlan{3, 2});
    CHECK(config.history_window == 8);
    CHECK(config.parallel == 4);
    CHECK(config.seed == 99);
    CHECK(config.deterministic);
    CHECK(config.out_dir == "out/elsewhere");
}

TEST_CASE("remote bindings parse their connection settings") {
    SuiteConfig config = parse(R"({
      "suite": "s", "pack": "p",
      "device": {"type": "gold"},
      "cloud": {"type": "remote", "endpoint": "http://127.0.0.1:8900/v1",
                "model": "big-model", "credential_env": "API_CRED",
                "timeout_s": 5.0, "retries": 1, "temperature": 0.3,
                "image_file": "shot.png"}
    })");
    CHECK(config.cloud.type == BackendBinding::Type::Remote);
    CHECK(config.cloud.remote.endpoint == "http://127.0.0.1:8900/v1");
    CHECK(config.cloud.remote.model == "big-model");
    CHECK(config.cloud.remote.credential_env == "API_CRED");
    CHECK(config.cloud.remote.timeout_s == 5.0);
    CHECK(config.cloud.remote.retries == 1);
    CHECK(config.cloud.remote.temperature == 0.3);
    CHECK(config.cloud.remote.image_file == "shot.png");
}

TEST_CASE("inline credentials are refused no matter how they are spelled") {
    const char* keys[] = {"credential", "api_key", "token"};
    for (const char* key : keys) {
        std::string text = std::string(R"({
          "suite": "s", "pack": "p",
          "device": {"type": "gold"},
          "cloud": {"type": "remote", "endpoint": "http://h", "model": "m", ")") +
                           key + R"(": "sk-oops"}
        })";
        expect_rejected(text, "must pass credentials via credential_env, not inline");
    }
}

TEST_CASE("malformed configs are rejected with the offending field named") {
    expect_rejected("not json", "invalid JSON");
    expect_rejected("[1, 2]", "top level must be an object");
    expect_rejected(R"({"pack": "p", "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "missing suite name");
    expect_rejected(R"({"suite": "s", "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "missing pack path");
    expect_rejected(R"({"suite": "s", "pack": "p", "device": {"type": "gold"}})",
                    "device and cloud bindings required");
    expect_rejected(R"({"suite": "s", "pack": "p", "arm": "hybrid",
                        "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "unknown arm 'hybrid'");
    expect_rejected(R"({"suite": "s", "pack": "p", "assessor_mode": "vibes",
                        "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "unknown decision mode 'vibes'");
    expect_rejected(R"({"suite": "s", "pack": "p", "parallel": 0,
                        "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "parallel must be >= 1");
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "plan_override": {"monitor_start": -1, "monitor_every": 2},
                        "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "invalid plan_override");
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "plan_override": {"monitor_start": 0, "monitor_every": 0},
                        "device": {"type": "gold"}, "cloud": {"type": "gold"}})",
                    "invalid plan_override");
}

TEST_CASE("malformed bindings are rejected with the slot named") {
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "device": "gold", "cloud": {"type": "gold"}})",
                    "device must be an object");
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "device": {"type": "oracle"}, "cloud": {"type": "gold"}})",
                    "device has unknown type 'oracle'");
    expect_rejected(R"({"suite": "s", "pack": "p", "device": {"type": "gold"},
                        "cloud": {"type": "gold_prefix_loop", "prefix": -1}})",
                    "cloud prefix must be >= 0");
    expect_rejected(R"({"suite": "s", "pack": "p", "device": {"type": "script"},
                        "cloud": {"type": "gold"}})",
                    "device script needs turns");
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "device": {"type": "script", "turns": []},
                        "cloud": {"type": "gold"}})",
                    "device script needs turns");
    expect_rejected(R"({"suite": "s", "pack": "p",
                        "device": {"type": "script", "turns": ["x"], "exhausted": "explode"},
                        "cloud": {"type": "gold"}})",
                    "unknown exhausted policy 'explode'");
    expect_rejected(R"({"suite": "s", "pack": "p", "device": {"type": "gold"},
                        "cloud": {"type": "remote", "model": "m"}})",
                    "remote binding needs endpoint and model");
    expect_rejected(R"({"suite": "s", "pack": "p", "device": {"type": "gold"},
                        "cloud": {"type": "remote", "endpoint": "http://h"}})",
                    "remote binding needs endpoint and model");
}

TEST_CASE("make_backend names the slot after its binding and tier") {
    const TaskSpec* task = pack().find_task("settings_wifi_on");
    REQUIRE(task != nullptr);

    BackendBinding gold;
    CHECK(make_backend(gold, Tier::Device, *task)->name() == "gold-device");

    BackendBinding prefix;
    prefix.type = BackendBinding::Type::GoldPrefixLoop;
    prefix.prefix = 2;
    auto stall = make_backend(prefix, Tier::Cloud, *task);
    CHECK(stall->name() == "gold_prefix(2)-cloud");
    CHECK(stall->tier() == Tier::Cloud);

    BackendBinding script;
    script.type = BackendBinding::Type::Script;
    script.turns = {"one"};
    CHECK(make_backend(script, Tier::Device, *task)->name() == "script-device");

    BackendBinding remote;
    remote.type = BackendBinding::Type::Remote;
    remote.remote.endpoint = "http://127.0.0.1:1";
    remote.remote.model = "m";
    CHECK(make_backend(remote, Tier::Cloud, *task)->name() == "remote-cloud");
}

TEST_CASE("scripted bindings get a fresh cursor per backend") {
    const TaskSpec* task = pack().find_task("settings_wifi_on");
    REQUIRE(task != nullptr);
    BackendBinding script;
    script.type = BackendBinding::Type::Script;
    script.turns = {"first", "second"};

    auto a = make_backend(script, Tier::Device, *task);
    CHECK(a->invoke({}).text == "first");
    CHECK(a->invoke({}).text == "second");
    // A second instance starts over instead of inheriting the cursor.
    auto b = make_backend(script, Tier::Device, *task);
    CHECK(b->invoke({}).text == "first");
}

TEST_CASE("run_suite writes traces and reports that replay cleanly") {
    SuiteConfig config = parse(kMinimal);
    config.task_filter = {"settings_wifi_on", "settings_bt_on", "browser_open_history"};
    config.deterministic = true;
    config.out_dir = "build/tmp_suite_out";
    std::filesystem::remove_all(config.out_dir);

    SuiteRun run = run_suite(config, pack());
    CHECK(run.report.tasks == 3);
    CHECK(run.report.successes == 3);
    CHECK(run.report.success_rate == 1.0);
    CHECK(run.report.cloud_steps == 0);

    REQUIRE(run.trace_files.size() == 3);
    for (const std::string& path : run.trace_files) {
        CHECK(std::filesystem::exists(path));
        ReplayVerdict verdict = replay_file(path, pack());
        CHECK(verdict.match);
    }
    CHECK(std::filesystem::exists(config.out_dir + "/report.txt"));
    CHECK(std::filesystem::exists(config.out_dir + "/report.tsv"));
    CHECK(read_file(config.out_dir + "/report.txt").rfind("suite: s\n", 0) == 0);
    std::filesystem::remove_all(config.out_dir);
}

TEST_CASE("an unknown task in the filter fails before any episode runs") {
    SuiteConfig config = parse(kMinimal);
    config.task_filter = {"settings_wifi_on", "no_such_task"};
    CHECK_THROWS_WITH_AS(run_suite(config, pack()),
                         "unknown task in config: no_such_task", ConfigError);
}

TEST_CASE("an empty selection is refused") {
    SuiteConfig config = parse(kMinimal);
    AppPack empty_tasks = pack();
    empty_tasks.tasks.clear();
    CHECK_THROWS_AS(run_suite(config, empty_tasks), ConfigError);
}

TEST_CASE("backend failures terminate the episode, not the suite") {
    SuiteConfig config = parse(kMinimal);
    config.arm = Arm::DeviceOnly;
    config.device.type = BackendBinding::Type::Script;
    config.device.turns = {"<CALLED_FUNCTION>wait(1)</CALLED_FUNCTION>"};
    config.device.exhausted = ScriptedBackend::ExhaustPolicy::Error;
    config.task_filter = {"settings_wifi_on"};
    config.deterministic = true;
    config.out_dir = "build/tmp_suite_fail";
    std::filesystem::remove_all(config.out_dir);

    SuiteRun run = run_suite(config, pack());
    REQUIRE(run.report.per_task.size() == 1);
    const EpisodeResult& r = run.report.per_task[0];
    CHECK_FALSE(r.success);
    CHECK(r.total_steps == 1);
    CHECK(r.termination.rfind("backend failure:", 0) == 0);
    std::filesystem::remove_all(config.out_dir);
}

TEST_CASE("parallel execution reproduces the serial run byte for byte") {
    SuiteConfig serial = parse(kMinimal);
    serial.deterministic = true;
    serial.out_dir = "build/tmp_suite_serial";
    SuiteConfig threaded = serial;
    threaded.parallel = 4;
    threaded.out_dir = "build/tmp_suite_parallel";
    std::filesystem::remove_all(serial.out_dir);
    std::filesystem::remove_all(threaded.out_dir);

    SuiteRun a = run_suite(serial, pack());
    SuiteRun b = run_suite(threaded, pack());
    CHECK(format_report_tsv(a.report) == format_report_tsv(b.report));
    REQUIRE(a.trace_files.size() == b.trace_files.size());
    for (size_t i = 0; i < a.trace_files.size(); ++i)
        CHECK(read_file(a.trace_files[i]) == read_file(b.trace_files[i]));
    std::filesystem::remove_all(serial.out_dir);
    std::filesystem::remove_all(threaded.out_dir);
}

TEST_CASE("run_bench reports all three arms over the same tasks") {
    SuiteConfig config = parse(kMinimal);
    config.device.type = BackendBinding::Type::GoldPrefixLoop;
    config.device.prefix = 1;
    config.plan_override = MonitorPlan{1, 2};
    config.task_filter = {"settings_wifi_on", "browser_open_history"};
    config.deterministic = true;
    config.out_dir = "build/tmp_bench_out";
    std::filesystem::remove_all(config.out_dir);

    BenchRun bench = run_bench(config, pack());
    CHECK(bench.device_only.success_rate == 0.0);
    CHECK(bench.cloud_only.success_rate == 1.0);
    CHECK(bench.collaborative.success_rate == 1.0);
    CHECK(bench.device_only.cloud_steps == 0);
    CHECK(bench.cloud_only.device_steps == 0);
    CHECK(bench.collaborative.device_steps > 0);
    CHECK(bench.collaborative.cloud_steps > 0);
    REQUIRE(bench.collaborative.cloud_steps_saved.has_value());
    CHECK(*bench.collaborative.cloud_steps_saved > 0.0);
    CHECK(*bench.collaborative.cloud_steps_saved < 1.0);

    std::string summary = read_file(config.out_dir + "/bench_summary.txt");
    CHECK(summary.find("device_only: ") != std::string::npos);
    CHECK(summary.find("cloud_only: ") != std::string::npos);
    CHECK(summary.find("collaborative: ") != std::string::npos);
    CHECK(summary.find("cloud_steps_saved ") != std::string::npos);
    std::filesystem::remove_all(config.out_dir);
}
