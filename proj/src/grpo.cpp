#include "tandem/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tandem/backend.hpp"
#include "tandem/errors.hpp"
#include "tandem/similarity.hpp"

namespace tandem {

namespace {

void check_reward_config(const RewardConfig& config) {
    if (config.fmt_decay <= 0.0 || config.fmt_decay > 1.0)
        throw ConfigError("fmt_decay must be in (0,1]");
    if (config.answer_threshold < 0.0 || config.answer_threshold > 1.0)
        throw ConfigError("answer_threshold must be in [0,1]");
}

void check_group(const GroupSample& group) {
    const size_t n = group.outputs.size();
    if (group.rewards.size() != n || group.old_probs.size() != n ||
        group.ref_probs.size() != n)
        throw ConfigError("group sample vectors must have equal length");
    if (n < 2) throw ConfigError("group too small: need at least 2 samples");
    for (double p : group.old_probs)
        if (!(p > 0.0)) throw ConfigError("old_probs must be positive");
    for (double p : group.ref_probs)
        if (!(p > 0.0)) throw ConfigError("ref_probs must be positive");
}

}  // namespace

double accuracy_reward(const ParsedTurn& turn, const GradingTarget& target,
                       const RewardConfig& config) {
    check_reward_config(config);
    ActionParseResult parsed = parse_action(turn.turn.call_text);
    if (!parsed.ok()) return 0.0;
    if (target.kind == TaskKind::Operation)
        return *parsed.action == target.gold_action ? config.acc_weight : 0.0;
    if (parsed.action->kind != ActionKind::Finish) return 0.0;
    SimilarityFn sim = similarity_by_id(config.similarity);
    double score = sim(parsed.action->message.value_or(""), target.gold_answer);
    return score >= config.answer_threshold ? config.acc_weight : 0.0;
}

double format_reward(const ConformityReport& report, const RewardConfig& config) {
    check_reward_config(config);
    return config.fmt_weight * (double(report.k) / 3.0) *
           std::pow(config.fmt_decay, double(report.c));
}

double total_reward(const ParsedTurn& turn, const GradingTarget& target,
                    const RewardConfig& config) {
    return accuracy_reward(turn, target, config) + format_reward(turn.report, config);
}

AdvantageResult group_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) throw ConfigError("group too small: need at least 2 samples");
    AdvantageResult result;
    result.advantages.assign(rewards.size(), 0.0);

    bool all_equal = true;
    for (double r : rewards)
        if (r != rewards.front()) all_equal = false;
    if (all_equal) {
        result.degenerate = true;
        return result;
    }

    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= double(rewards.size());
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= double(rewards.size());
    double std_dev = std::sqrt(var);
    for (size_t i = 0; i < rewards.size(); ++i)
        result.advantages[i] = (rewards[i] - mean) / std_dev;
    return result;
}

double kl_unbiased(double prob_ref, double prob_theta) {
    if (!(prob_ref > 0.0) || !(prob_theta > 0.0))
        throw std::domain_error("kl_unbiased needs positive probabilities");
    double d = prob_ref / prob_theta - 1.0;
    return std::max(0.0, d - std::log1p(d));
}

double clipped_term(double rho, double advantage, double epsilon) {
    if (epsilon <= 0.0) throw ConfigError("clip epsilon must be positive");
    double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(rho * advantage, clipped * advantage);
}

std::vector<double> PolicyParams::probs(int context) const {
    const auto& row = logits.at(static_cast<size_t>(context));
    double peak = *std::max_element(row.begin(), row.end());
    std::vector<double> out(row.size());
    double total = 0.0;
    for (size_t i = 0; i < row.size(); ++i) {
        out[i] = std::exp(row[i] - peak);
        total += out[i];
    }
    for (double& p : out) p /= total;
    return out;
}

double grpo_loss(const PolicyParams& policy, const std::vector<GroupSample>& groups,
                 const GrpoConfig& config) {
    if (groups.empty()) throw ConfigError("grpo_loss needs at least one group");
    double total = 0.0;
    for (const auto& group : groups) {
        check_group(group);
        AdvantageResult adv = group_advantages(group.rewards);
        if (adv.degenerate) continue;
        std::vector<double> probs = policy.probs(group.context);
        const double n = double(group.outputs.size());
        double sum_clip = 0.0;
        double sum_kl = 0.0;
        for (size_t i = 0; i < group.outputs.size(); ++i) {
            double p = probs.at(static_cast<size_t>(group.outputs[i]));
            double rho = p / group.old_probs[i];
            sum_clip += clipped_term(rho, adv.advantages[i], config.clip_epsilon);
            sum_kl += kl_unbiased(group.ref_probs[i], p);
        }
        total += -(sum_clip / n) + config.kl_beta * (sum_kl / n);
    }
    return total / double(groups.size());
}

StepDiagnostics grpo_step(PolicyParams& policy, const std::vector<GroupSample>& groups,
                          const GrpoConfig& config) {
    if (groups.empty()) throw ConfigError("grpo_step needs at least one group");
    StepDiagnostics diag;

    std::vector<std::vector<double>> grad(policy.logits.size());
    for (size_t c = 0; c < grad.size(); ++c) grad[c].assign(policy.logits[c].size(), 0.0);

    long long reward_count = 0;
    long long live_count = 0;
    double reward_sum = 0.0;
    double abs_adv_sum = 0.0;
    double kl_sum = 0.0;

    for (const auto& group : groups) {
        check_group(group);
        for (double r : group.rewards) {
            reward_sum += r;
            ++reward_count;
        }
        AdvantageResult adv = group_advantages(group.rewards);
        if (adv.degenerate) {
            diag.degenerate_groups += 1;
            continue;
        }
        std::vector<double> probs = policy.probs(group.context);
        auto& grow = grad.at(static_cast<size_t>(group.context));
        const double n = double(group.outputs.size());
        double sum_clip = 0.0;
        double sum_kl = 0.0;
        for (size_t i = 0; i < group.outputs.size(); ++i) {
            const int out = group.outputs[i];
            const double p = probs.at(static_cast<size_t>(out));
            const double a = adv.advantages[i];
            const double rho = p / group.old_probs[i];
            const double unclipped = rho * a;
            const double clipped =
                std::clamp(rho, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * a;
            sum_clip += std::min(unclipped, clipped);
            sum_kl += kl_unbiased(group.ref_probs[i], p);
            abs_adv_sum += std::abs(a);
            ++live_count;

            // Tie goes to the unclipped branch, matching min's first argument.
            const double dmin_dp = unclipped <= clipped ? a / group.old_probs[i] : 0.0;
            const double dkl_dp = 1.0 / p - group.ref_probs[i] / (p * p);
            const double coeff =
                (-(dmin_dp / n) + config.kl_beta * (dkl_dp / n)) / double(groups.size());
            for (size_t v = 0; v < probs.size(); ++v) {
                double jac = p * ((static_cast<int>(v) == out ? 1.0 : 0.0) - probs[v]);
                grow[v] += coeff * jac;
            }
        }
        diag.loss += -(sum_clip / n) + config.kl_beta * (sum_kl / n);
        kl_sum += sum_kl;
    }
    diag.loss /= double(groups.size());

    double norm_sq = 0.0;
    for (size_t c = 0; c < grad.size(); ++c) {
        for (size_t v = 0; v < grad[c].size(); ++v) {
            norm_sq += grad[c][v] * grad[c][v];
            policy.logits[c][v] -= config.learning_rate * grad[c][v];
        }
    }
    diag.grad_norm = std::sqrt(norm_sq);
    diag.mean_reward = reward_count ? reward_sum / double(reward_count) : 0.0;
    diag.mean_abs_advantage = live_count ? abs_adv_sum / double(live_count) : 0.0;
    diag.mean_kl = live_count ? kl_sum / double(live_count) : 0.0;
    return diag;
}

ToyTask make_bandit_task() {
    ToyTask task;
    task.id = "bandit";
    task.contexts = 1;
    task.vocab = 2;
    task.reward = {{1.0, 0.0}};
    task.target = {0};
    return task;
}

namespace {

std::string strip_assessment_block(const TaskSpec& task,
                                   const std::vector<Element>& elements,
                                   const std::string& call) {
    std::string out;
    out += "<REASONING>\n";
    out += "- Task: " + task.instruction + "\n";
    out += "- The screen lists " + std::to_string(elements.size()) +
           " interactive elements.\n";
    out += "- Best next step: " + call;
    out += "\n</REASONING>\n\n<CALLED_FUNCTION>\n";
    out += call;
    out += "\n</CALLED_FUNCTION>";
    return out;
}

}  // namespace

ToyTask make_gui_task(const AppPack& pack, const std::string& task_id,
                      const RewardConfig& reward_config) {
    const TaskSpec* task = pack.find_task(task_id);
    if (!task) throw ConfigError("unknown task: " + task_id);
    if (task->gold.empty()) throw ConfigError("task '" + task_id + "' has no gold rules");

    ToyTask toy;
    toy.id = "gui:" + task_id;

    EpisodeState env = reset(*task, pack);
    while (!env.finished && !env.terminated) {
        std::vector<Element> elements = current_screen(env, pack).elements;
        auto call = match_gold_rule(*task, elements);
        if (!call)
            throw ConfigError("gold rules for '" + task_id + "' stall at screen '" +
                              env.current_screen_id + "'");
        ActionParseResult parsed = parse_action(*call);
        if (!parsed.ok())
            throw ConfigError("gold call does not parse: " + *call);

        GradingTarget target;
        if (task->kind == TaskKind::Query && parsed.action->kind == ActionKind::Finish) {
            target.kind = TaskKind::Query;
            target.gold_answer = task->gold_answer;
        } else {
            target.kind = TaskKind::Operation;
            target.gold_action = *parsed.action;
        }

        const std::string wrong = *call == "back()" ? "home()" : "back()";
        std::vector<std::string> candidates = {
            compose_turn(*task, elements, *call),
            compose_turn(*task, elements, wrong),
            strip_assessment_block(*task, elements, *call),
            compose_turn(*task, elements, *call) + "\nPLEASE CONFIRM",
        };
        std::vector<double> rewards;
        rewards.reserve(candidates.size());
        for (const auto& text : candidates)
            rewards.push_back(total_reward(parse_turn(text), target, reward_config));

        toy.reward.push_back(std::move(rewards));
        toy.candidates.push_back(std::move(candidates));
        toy.target.push_back(0);
        apply(env, *parsed.action, pack, task->max_steps);
    }
    if (!env.finished)
        throw ConfigError("gold rules for '" + task_id + "' never finish");

    toy.contexts = static_cast<int>(toy.reward.size());
    toy.vocab = toy.reward.empty() ? 0 : static_cast<int>(toy.reward[0].size());
    return toy;
}

double uniform01(uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

TrainResult train_toy(const ToyTask& task, const GrpoConfig& config) {
    if (task.contexts < 1 || task.vocab < 2)
        throw ConfigError("toy task needs at least one context and two outputs");
    if (static_cast<int>(task.reward.size()) != task.contexts)
        throw ConfigError("toy task reward matrix has wrong shape");
    for (const auto& row : task.reward)
        if (static_cast<int>(row.size()) != task.vocab)
            throw ConfigError("toy task reward matrix has wrong shape");
    if (static_cast<int>(task.target.size()) != task.contexts)
        throw ConfigError("toy task target vector has wrong shape");
    if (config.group_size < 2) throw ConfigError("group_size must be at least 2");
    if (config.iterations < 1) throw ConfigError("iterations must be at least 1");
    if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");

    TrainResult result;
    result.policy.logits.assign(static_cast<size_t>(task.contexts),
                                std::vector<double>(static_cast<size_t>(task.vocab), 0.0));

    std::vector<std::vector<double>> ref_probs(static_cast<size_t>(task.contexts));
    for (int c = 0; c < task.contexts; ++c) ref_probs[c] = result.policy.probs(c);

    std::mt19937_64 rng(config.seed);
    auto draw = [&](const std::vector<double>& probs) {
        double u = uniform01(rng());
        double cum = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    };

    result.curve.reserve(static_cast<size_t>(config.iterations));
    for (int iter = 0; iter < config.iterations; ++iter) {
        std::vector<GroupSample> groups;
        groups.reserve(static_cast<size_t>(task.contexts));
        for (int c = 0; c < task.contexts; ++c) {
            std::vector<double> old_probs_row = result.policy.probs(c);
            GroupSample group;
            group.context = c;
            for (int i = 0; i < config.group_size; ++i) {
                int out = draw(old_probs_row);
                group.outputs.push_back(out);
                group.rewards.push_back(task.reward[c][static_cast<size_t>(out)]);
                group.old_probs.push_back(old_probs_row[static_cast<size_t>(out)]);
                group.ref_probs.push_back(ref_probs[c][static_cast<size_t>(out)]);
            }
            groups.push_back(std::move(group));
        }
        StepDiagnostics diag = grpo_step(result.policy, groups, config);

        CurvePoint point;
        point.iteration = iter;
        point.mean_reward = diag.mean_reward;
        point.mean_kl = diag.mean_kl;
        point.grad_norm = diag.grad_norm;
        double target_prob = 0.0;
        for (int c = 0; c < task.contexts; ++c)
            target_prob +=
                result.policy.probs(c)[static_cast<size_t>(task.target[c])];
        point.target_prob = target_prob / double(task.contexts);
        result.curve.push_back(point);
    }
    return result;
}

}  // namespace tandem
