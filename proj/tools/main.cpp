#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tandem/env.hpp"
#include "tandem/errors.hpp"
#include "tandem/grpo.hpp"
#include "tandem/suite.hpp"
#include "tandem/trace.hpp"

namespace {

using tandem::ConfigError;

struct CommonFlags {
    std::optional<uint64_t> seed;
    std::optional<int> parallel;
    bool deterministic = false;
    std::string mode;  // "", "rules", "model"
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the run seed");
    cmd->add_option("--parallel", flags.parallel, "Max concurrent episodes")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--deterministic", flags.deterministic,
                  "Zero wall-clock fields for byte-stable traces");
    cmd->add_option("--mode", flags.mode, "Assessor and switcher mode")
        ->check(CLI::IsMember({"rules", "model"}));
}

tandem::SuiteConfig configure(const std::string& path, const CommonFlags& flags) {
    tandem::SuiteConfig config = tandem::load_suite_config(path);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.parallel) config.parallel = *flags.parallel;
    if (flags.deterministic) config.deterministic = true;
    if (flags.mode == "rules") {
        config.assessor_mode = tandem::DecisionMode::Rules;
        config.switcher_mode = tandem::DecisionMode::Rules;
    } else if (flags.mode == "model") {
        config.assessor_mode = tandem::DecisionMode::Model;
        config.switcher_mode = tandem::DecisionMode::Model;
    }
    return config;
}

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
    tandem::SuiteConfig config = configure(config_path, flags);
    tandem::AppPack pack = tandem::load_pack(config.pack_path);
    tandem::SuiteRun run = tandem::run_suite(config, pack);
    std::cout << tandem::format_report_table(run.report);
    std::cout << "traces: " << run.trace_files.size() << " file(s) under " << config.out_dir
              << "/traces\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const CommonFlags& flags) {
    tandem::SuiteConfig config = configure(config_path, flags);
    tandem::AppPack pack = tandem::load_pack(config.pack_path);
    tandem::BenchRun bench = tandem::run_bench(config, pack);
    std::cout << tandem::format_bench_summary(bench);
    return 0;
}

int cmd_replay(const std::string& trace_path, std::string pack_path) {
    tandem::LoadedTrace trace = tandem::read_trace(trace_path);
    if (pack_path.empty()) pack_path = "packs/" + trace.header.pack_id + ".json";
    tandem::AppPack pack = tandem::load_pack(pack_path);
    tandem::ReplayVerdict verdict = tandem::replay_trace(trace, pack);
    if (verdict.match) {
        std::cout << trace_path << ": match\n";
        return 0;
    }
    std::cout << trace_path << ": divergence: " << verdict.divergence << "\n";
    return 1;
}

int cmd_validate_pack(const std::string& pack_path) {
    tandem::AppPack pack = tandem::load_pack(pack_path);
    int screens = 0;
    for (const auto& app : pack.apps) screens += static_cast<int>(app.screens.size());
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(pack.content_hash));
    std::cout << "pack '" << pack.id << "': OK (" << pack.apps.size() << " apps, " << screens
              << " screens, " << pack.tasks.size() << " tasks, hash " << hash << ")\n";
    return 0;
}

int cmd_grpo_demo(const std::string& config_path, const CommonFlags& flags) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json root = nlohmann::json::parse(buf.str(), nullptr, false);
    if (root.is_discarded()) throw ConfigError(config_path + ": invalid JSON");

    tandem::GrpoConfig config;
    config.group_size = root.value("group_size", config.group_size);
    config.clip_epsilon = root.value("clip_epsilon", config.clip_epsilon);
    config.kl_beta = root.value("kl_beta", config.kl_beta);
    config.learning_rate = root.value("learning_rate", config.learning_rate);
    config.iterations = root.value("iterations", config.iterations);
    config.seed = root.value("seed", config.seed);
    if (flags.seed) config.seed = *flags.seed;

    tandem::ToyTask task;
    std::string kind = root.value("task", "");
    if (kind == "bandit") {
        task = tandem::make_bandit_task();
    } else if (kind == "gui") {
        std::string pack_path = root.value("pack", "");
        std::string pack_task = root.value("pack_task", "");
        if (pack_path.empty() || pack_task.empty())
            throw ConfigError(config_path + ": gui task needs pack and pack_task");
        tandem::AppPack pack = tandem::load_pack(pack_path);
        tandem::RewardConfig reward;
        reward.acc_weight = root.value("acc_weight", reward.acc_weight);
        reward.fmt_weight = root.value("fmt_weight", reward.fmt_weight);
        reward.answer_threshold = root.value("answer_threshold", reward.answer_threshold);
        reward.fmt_decay = root.value("fmt_decay", reward.fmt_decay);
        task = tandem::make_gui_task(pack, pack_task, reward);
    } else {
        throw ConfigError(config_path + ": task must be \"bandit\" or \"gui\"");
    }

    tandem::TrainResult result = tandem::train_toy(task, config);

    std::string out_dir = root.value("out_dir", "out/grpo");
    std::filesystem::create_directories(out_dir);
    std::string curve_path = out_dir + "/curve.tsv";
    std::ofstream curve(curve_path, std::ios::binary | std::ios::trunc);
    if (!curve) throw ConfigError("cannot write " + curve_path);
    curve << "iteration\tmean_reward\ttarget_prob\tmean_kl\tgrad_norm\n";
    for (const auto& point : result.curve) {
        char line[160];
        std::snprintf(line, sizeof line, "%d\t%.6f\t%.6f\t%.8f\t%.8f\n", point.iteration,
                      point.mean_reward, point.target_prob, point.mean_kl, point.grad_norm);
        curve << line;
    }

    const tandem::CurvePoint& final_point = result.curve.back();
    std::cout << "task " << task.id << ": " << config.iterations << " iterations, final"
              << " target_prob " << final_point.target_prob << ", mean_reward "
              << final_point.mean_reward << "\n";
    std::cout << "curve: " << curve_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Device-cloud GUI agent runtime"};
    app.require_subcommand(1);

    CommonFlags flags;

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "Execute a suite and write traces + reports");
    run->add_option("config", run_config, "Suite config JSON")->required();
    add_common(run, flags);

    std::string bench_config;
    CLI::App* bench =
        app.add_subcommand("bench", "Run device-only, cloud-only, and collaborative arms");
    bench->add_option("config", bench_config, "Suite config JSON")->required();
    add_common(bench, flags);

    std::string trace_path;
    std::string replay_pack;
    CLI::App* replay = app.add_subcommand("replay", "Re-run a trace against its pack");
    replay->add_option("trace", trace_path, "Trace .jsonl file")->required();
    replay->add_option("--pack", replay_pack,
                       "Pack file (default: packs/<pack-id>.json from the trace header)");

    std::string grpo_config;
    CLI::App* grpo = app.add_subcommand("grpo-demo", "Train the toy policy and dump the curve");
    grpo->add_option("config", grpo_config, "Training run config JSON")->required();
    add_common(grpo, flags);

    std::string pack_path;
    CLI::App* validate = app.add_subcommand("validate-pack", "Check a pack file");
    validate->add_option("pack", pack_path, "Pack JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config, flags);
        if (bench->parsed()) return cmd_bench(bench_config, flags);
        if (replay->parsed()) return cmd_replay(trace_path, replay_pack);
        if (grpo->parsed()) return cmd_grpo_demo(grpo_config, flags);
        if (validate->parsed()) return cmd_validate_pack(pack_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tandem::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
