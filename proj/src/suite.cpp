#include "tandem/suite.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/trace.hpp"

namespace tandem {

using nlohmann::json;

namespace {

BackendBinding parse_binding(const json& j, std::string_view source,
                             const std::string& slot) {
    BackendBinding binding;
    if (!j.is_object())
        throw ConfigError(std::string(source) + ": " + slot + " must be an object");
    std::string type = j.value("type", "");
    if (type == "gold") {
        binding.type = BackendBinding::Type::Gold;
    } else if (type == "gold_prefix_loop") {
        binding.type = BackendBinding::Type::GoldPrefixLoop;
        binding.prefix = j.value("prefix", 1);
        if (binding.prefix < 0)
            throw ConfigError(std::string(source) + ": " + slot + " prefix must be >= 0");
    } else if (type == "script") {
        binding.type = BackendBinding::Type::Script;
        if (!j.contains("turns") || !j["turns"].is_array() || j["turns"].empty())
            throw ConfigError(std::string(source) + ": " + slot + " script needs turns");
        for (const json& turn : j["turns"]) binding.turns.push_back(turn.get<std::string>());
        std::string policy = j.value("exhausted", "repeat_last");
        if (policy == "repeat_last")
            binding.exhausted = ScriptedBackend::ExhaustPolicy::RepeatLast;
        else if (policy == "error")
            binding.exhausted = ScriptedBackend::ExhaustPolicy::Error;
        else
            throw ConfigError(std::string(source) + ": " + slot + " has unknown exhausted policy '" +
                              policy + "'");
    } else if (type == "remote") {
        binding.type = BackendBinding::Type::Remote;
        binding.remote.endpoint = j.value("endpoint", "");
        binding.remote.model = j.value("model", "");
        binding.remote.credential_env = j.value("credential_env", "");
        binding.remote.timeout_s = j.value("timeout_s", 120.0);
        binding.remote.retries = j.value("retries", 2);
        binding.remote.temperature = j.value("temperature", 0.0);
        binding.remote.image_file = j.value("image_file", "");
        if (binding.remote.endpoint.empty() || binding.remote.model.empty())
            throw ConfigError(std::string(source) + ": " + slot +
                              " remote binding needs endpoint and model");
        if (j.contains("credential") || j.contains("api_key") || j.contains("token"))
            throw ConfigError(std::string(source) + ": " + slot +
                              " must pass credentials via credential_env, not inline");
    } else {
        throw ConfigError(std::string(source) + ": " + slot + " has unknown type '" + type +
                          "'");
    }
    return binding;
}

Arm parse_arm(const std::string& name, std::string_view source) {
    if (name == "collaborative") return Arm::Collaborative;
    if (name == "cloud_only") return Arm::CloudOnly;
    if (name == "device_only") return Arm::DeviceOnly;
    throw ConfigError(std::string(source) + ": unknown arm '" + name + "'");
}

DecisionMode parse_mode(const std::string& name, std::string_view source) {
    if (name == "rules") return DecisionMode::Rules;
    if (name == "model") return DecisionMode::Model;
    throw ConfigError(std::string(source) + ": unknown decision mode '" + name + "'");
}

std::string slot_name(const BackendBinding& binding, Tier tier) {
    std::string base;
    switch (binding.type) {
        case BackendBinding::Type::Gold: base = "gold"; break;
        case BackendBinding::Type::GoldPrefixLoop:
            base = "gold_prefix(" + std::to_string(binding.prefix) + ")";
            break;
        case BackendBinding::Type::Script: base = "script"; break;
        case BackendBinding::Type::Remote: base = "remote"; break;
    }
    return base + "-" + to_string(tier);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::filesystem::path fs_path(path);
    if (fs_path.has_parent_path()) std::filesystem::create_directories(fs_path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << text;
}

}  // namespace

SuiteConfig parse_suite_config(std::string_view json_text, std::string_view source_name) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded())
        throw ConfigError(std::string(source_name) + ": invalid JSON");
    if (!root.is_object())
        throw ConfigError(std::string(source_name) + ": top level must be an object");

    SuiteConfig config;
    config.suite = root.value("suite", "");
    if (config.suite.empty())
        throw ConfigError(std::string(source_name) + ": missing suite name");
    config.pack_path = root.value("pack", "");
    if (config.pack_path.empty())
        throw ConfigError(std::string(source_name) + ": missing pack path");
    if (root.contains("tasks"))
        for (const json& task : root["tasks"])
            config.task_filter.push_back(task.get<std::string>());
    config.arm = parse_arm(root.value("arm", "collaborative"), source_name);
    if (!root.contains("device") || !root.contains("cloud"))
        throw ConfigError(std::string(source_name) + ": device and cloud bindings required");
    config.device = parse_binding(root["device"], source_name, "device");
    config.cloud = parse_binding(root["cloud"], source_name, "cloud");
    config.assessor_mode = parse_mode(root.value("assessor_mode", "rules"), source_name);
    config.switcher_mode = parse_mode(root.value("switcher_mode", "rules"), source_name);
    if (root.contains("plan_override")) {
        const json& plan = root["plan_override"];
        config.plan_override =
            MonitorPlan{plan.value("monitor_start", 0), plan.value("monitor_every", 1)};
        if (config.plan_override->monitor_start < 0 || config.plan_override->monitor_every < 1)
            throw ConfigError(std::string(source_name) + ": invalid plan_override");
    }
    config.history_window = root.value("history_window", 16);
    config.parallel = root.value("parallel", 1);
    if (config.parallel < 1)
        throw ConfigError(std::string(source_name) + ": parallel must be >= 1");
    config.seed = root.value("seed", 0ULL);
    config.deterministic = root.value("deterministic", false);
    config.out_dir = root.value("out_dir", "out");
    return config;
}

SuiteConfig load_suite_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_suite_config(buf.str(), path);
}

std::unique_ptr<ModelBackend> make_backend(const BackendBinding& binding, Tier tier,
                                           const TaskSpec& task) {
    const std::string name = slot_name(binding, tier);
    switch (binding.type) {
        case BackendBinding::Type::Gold:
            return std::make_unique<GoldPolicyBackend>(name, tier, task);
        case BackendBinding::Type::GoldPrefixLoop:
            return std::make_unique<GoldPolicyBackend>(name, tier, task, binding.prefix);
        case BackendBinding::Type::Script:
            return std::make_unique<ScriptedBackend>(name, tier, binding.turns,
                                                     binding.exhausted);
        case BackendBinding::Type::Remote:
            return std::make_unique<RemoteBackend>(name, tier, binding.remote);
    }
    throw ConfigError("invalid backend binding");
}

SuiteRun run_suite(const SuiteConfig& config, const AppPack& pack) {
    std::vector<const TaskSpec*> tasks;
    if (config.task_filter.empty()) {
        for (const auto& task : pack.tasks) tasks.push_back(&task);
    } else {
        for (const auto& id : config.task_filter) {
            const TaskSpec* task = pack.find_task(id);
            if (!task) throw ConfigError("unknown task in config: " + id);
            tasks.push_back(task);
        }
    }
    if (tasks.empty()) throw ConfigError("suite '" + config.suite + "' selects no tasks");

    std::vector<EpisodeResult> results(tasks.size());
    std::vector<std::string> trace_files(tasks.size());
    std::vector<std::string> errors(tasks.size());

    auto run_one = [&](size_t i) {
        const TaskSpec& task = *tasks[i];
        try {
            auto device = make_backend(config.device, Tier::Device, task);
            auto cloud = make_backend(config.cloud, Tier::Cloud, task);

            OrchestratorConfig ocfg;
            ocfg.arm = config.arm;
            ocfg.assessor_mode = config.assessor_mode;
            ocfg.switcher_mode = config.switcher_mode;
            ocfg.plan_override = config.plan_override;
            ocfg.history_window = config.history_window;
            ocfg.deterministic = config.deterministic;

            EpisodeOutcome outcome = run_episode(task, pack, *device, *cloud, ocfg);

            TraceHeader header;
            header.suite = config.suite;
            header.task_id = task.id;
            header.pack_id = pack.id;
            header.pack_hash = pack.content_hash;
            header.seed = config.seed;
            header.arm = config.arm;
            header.plan = outcome.plan;
            header.plan_fallback = outcome.plan_fallback;
            header.assessor_mode = config.assessor_mode;
            header.switcher_mode = config.switcher_mode;
            header.deterministic = config.deterministic;

            std::string path = config.out_dir + "/traces/" + task.id + ".jsonl";
            write_trace(path, header, outcome.steps, outcome.result);
            trace_files[i] = path;
            results[i] = outcome.result;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (config.parallel <= 1 || tasks.size() <= 1) {
        for (size_t i = 0; i < tasks.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= tasks.size()) break;
                run_one(i);
            }
        };
        size_t n = std::min<size_t>(config.parallel, tasks.size());
        std::vector<std::thread> threads;
        threads.reserve(n);
        for (size_t i = 0; i < n; ++i) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
    }

    for (size_t i = 0; i < tasks.size(); ++i)
        if (!errors[i].empty())
            throw ConfigError("task '" + tasks[i]->id + "' failed: " + errors[i]);

    SuiteRun run;
    run.report = aggregate(config.suite, results);
    run.trace_files = std::move(trace_files);
    write_text_file(config.out_dir + "/report.txt", format_report_table(run.report));
    write_text_file(config.out_dir + "/report.tsv", format_report_tsv(run.report));
    return run;
}

BenchRun run_bench(const SuiteConfig& config, const AppPack& pack) {
    auto arm_config = [&](Arm arm, const std::string& sub) {
        SuiteConfig c = config;
        c.arm = arm;
        c.suite = config.suite + "/" + sub;
        c.out_dir = config.out_dir + "/" + sub;
        return c;
    };

    BenchRun bench;
    bench.device_only = run_suite(arm_config(Arm::DeviceOnly, "device_only"), pack).report;
    SuiteRun cloud = run_suite(arm_config(Arm::CloudOnly, "cloud_only"), pack);
    bench.cloud_only = cloud.report;
    SuiteRun collab = run_suite(arm_config(Arm::Collaborative, "collaborative"), pack);
    bench.collaborative =
        aggregate(collab.report.suite, collab.report.per_task, &cloud.report.per_task);
    write_text_file(config.out_dir + "/bench_summary.txt", format_bench_summary(bench));
    return bench;
}

std::string format_bench_summary(const BenchRun& bench) {
    auto line = [](const std::string& arm, const RunReport& report) {
        std::string out = arm + ": success_rate ";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", report.success_rate);
        out += buf;
        out += ", device_steps " + std::to_string(report.device_steps);
        out += ", cloud_steps " + std::to_string(report.cloud_steps);
        out += ", monitor_calls " + std::to_string(report.monitor_calls);
        if (report.cloud_steps_saved) {
            std::snprintf(buf, sizeof buf, "%.4f", *report.cloud_steps_saved);
            out += ", cloud_steps_saved ";
            out += buf;
        }
        out += "\n";
        return out;
    };
    std::string out;
    out += line("device_only", bench.device_only);
    out += line("cloud_only", bench.cloud_only);
    out += line("collaborative", bench.collaborative);
    return out;
}

}  // namespace tandem
