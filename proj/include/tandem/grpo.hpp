#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tandem/action.hpp"
#include "tandem/env.hpp"
#include "tandem/protocol.hpp"

namespace tandem {

struct RewardConfig {
    double acc_weight = 1.0;
    double fmt_weight = 0.5;
    double answer_threshold = 0.7;  // query accuracy cutoff
    double fmt_decay = 0.99;        // per extraneous non-whitespace character
    std::string similarity = "token_f1";
};

// What a sampled turn is graded against.
struct GradingTarget {
    TaskKind kind = TaskKind::Operation;
    Action gold_action;       // operation
    std::string gold_answer;  // query
};

double accuracy_reward(const ParsedTurn& turn, const GradingTarget& target,
                       const RewardConfig& config);
double format_reward(const ConformityReport& report, const RewardConfig& config);
double total_reward(const ParsedTurn& turn, const GradingTarget& target,
                    const RewardConfig& config);

struct AdvantageResult {
    std::vector<double> advantages;
    bool degenerate = false;  // all rewards tied, every advantage zeroed
};

// Group-normalized advantages (population standard deviation).
// Throws ConfigError for groups smaller than two.
AdvantageResult group_advantages(const std::vector<double>& rewards);

// ratio - log(ratio) - 1 with ratio = prob_ref / prob_theta, computed so it
// never rounds negative. Throws std::domain_error on non-positive probs.
double kl_unbiased(double prob_ref, double prob_theta);

// min(rho * advantage, clip(rho, 1-eps, 1+eps) * advantage).
double clipped_term(double rho, double advantage, double epsilon);

// Tabular softmax policy: one logit row per context.
struct PolicyParams {
    std::vector<std::vector<double>> logits;

    int contexts() const { return static_cast<int>(logits.size()); }
    int vocab() const { return logits.empty() ? 0 : static_cast<int>(logits[0].size()); }
    std::vector<double> probs(int context) const;
};

// One sampled group: outputs drawn from the old policy for a single context.
struct GroupSample {
    int context = 0;
    std::vector<int> outputs;
    std::vector<double> rewards;
    std::vector<double> old_probs;  // behavior policy probs of each output
    std::vector<double> ref_probs;  // reference policy probs of each output
};

struct GrpoConfig {
    int group_size = 8;
    double clip_epsilon = 0.2;
    double kl_beta = 0.04;
    double learning_rate = 0.1;
    int iterations = 200;
    uint64_t seed = 7;
};

// Surrogate objective over a batch of groups; degenerate groups contribute
// exactly zero. This is the function grpo_step descends.
double grpo_loss(const PolicyParams& policy, const std::vector<GroupSample>& groups,
                 const GrpoConfig& config);

struct StepDiagnostics {
    double loss = 0.0;
    double mean_reward = 0.0;
    double mean_abs_advantage = 0.0;
    double mean_kl = 0.0;
    double grad_norm = 0.0;
    int degenerate_groups = 0;
};

// One analytic gradient-descent step on grpo_loss; updates the policy in
// place and reports diagnostics from the pre-update parameters.
StepDiagnostics grpo_step(PolicyParams& policy, const std::vector<GroupSample>& groups,
                          const GrpoConfig& config);

// A fixed contextual bandit: deterministic reward per (context, output),
// candidate turn texts kept for inspection.
struct ToyTask {
    std::string id;
    int contexts = 0;
    int vocab = 0;
    std::vector<std::vector<double>> reward;  // [context][output]
    std::vector<int> target;                  // best output per context
    std::vector<std::vector<std::string>> candidates;  // optional turn texts
};

ToyTask make_bandit_task();
// Three-step GUI task: candidates are full turns graded through the real
// reward pipeline against a pack task's reference actions.
ToyTask make_gui_task(const AppPack& pack, const std::string& task_id,
                      const RewardConfig& reward_config);

struct CurvePoint {
    int iteration = 0;
    double mean_reward = 0.0;
    double target_prob = 0.0;  // mean prob of the per-context target output
    double mean_kl = 0.0;
    double grad_norm = 0.0;
};

struct TrainResult {
    PolicyParams policy;
    std::vector<CurvePoint> curve;
};

// Iterated sampling + grpo_step; the reference policy is the initial one,
// the behavior policy refreshes every iteration.
TrainResult train_toy(const ToyTask& task, const GrpoConfig& config);

// Deterministic uniform in [0,1) built from the top 53 bits of the
// generator output, identical across platforms.
double uniform01(uint64_t bits);

}  // namespace tandem
