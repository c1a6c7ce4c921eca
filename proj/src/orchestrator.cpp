#include "tandem/orchestrator.hpp"

#include <chrono>
#include <cstdlib>

#include "tandem/errors.hpp"
#include "tandem/history.hpp"

namespace tandem {

std::string to_string(DecisionMode mode) {
    return mode == DecisionMode::Rules ? "rules" : "model";
}

std::string to_string(Verdict verdict) {
    return verdict == Verdict::Device ? "device" : "cloud";
}

std::string to_string(SwitchBasis basis) {
    switch (basis) {
        case SwitchBasis::RuleRepetition: return "rule_repetition";
        case SwitchBasis::RuleNoProgress: return "rule_no_progress";
        case SwitchBasis::RuleQuality: return "rule_quality";
        case SwitchBasis::ModelVerdict: return "model_verdict";
    }
    return "model_verdict";
}

std::string to_string(Arm arm) {
    switch (arm) {
        case Arm::Collaborative: return "collaborative";
        case Arm::CloudOnly: return "cloud_only";
        case Arm::DeviceOnly: return "device_only";
    }
    return "collaborative";
}

namespace {

std::string trim_copy(std::string_view text) {
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    size_t end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

std::optional<int> parse_tagged_int(const std::string& text, std::string_view open,
                                    std::string_view close) {
    size_t start = text.find(open);
    if (start == std::string::npos) return std::nullopt;
    start += open.size();
    size_t end = text.find(close, start);
    if (end == std::string::npos) return std::nullopt;
    std::string value = trim_copy(text.substr(start, end - start));
    if (value.empty()) return std::nullopt;
    char* rest = nullptr;
    long parsed = std::strtol(value.c_str(), &rest, 10);
    if (!rest || *rest != '\0') return std::nullopt;
    return static_cast<int>(parsed);
}

MonitorPlan plan_from_risk(RiskTier risk) {
    switch (risk) {
        case RiskTier::Critical: return {1, 2};
        case RiskTier::High: return {2, 2};
        case RiskTier::Medium: return {3, 3};
        case RiskTier::Low: return {5, 4};
    }
    return {3, 3};
}

}  // namespace

MonitorPlan assess_complexity(const TaskSpec& task, DecisionMode mode,
                              ModelBackend* backend, bool* used_fallback) {
    if (used_fallback) *used_fallback = false;
    if (mode == DecisionMode::Rules) return plan_from_risk(task.risk);
    if (!backend) throw ConfigError("model-mode assessment needs a backend");

    auto prompt = assemble_prompt(task.instruction, "(not yet observed)",
                                  "No history yet.", TemplateId::Assessor);
    InvokeResult reply = backend->invoke(prompt);
    auto start = parse_tagged_int(reply.text, "<MONITORING START FROM>",
                                  "</MONITORING START FROM>");
    auto every = parse_tagged_int(reply.text, "<MONITORING FREQUENCY>",
                                  "</MONITORING FREQUENCY>");
    if (!start || !every || *start < 0 || *every < 1) {
        if (used_fallback) *used_fallback = true;
        return plan_from_risk(task.risk);
    }
    return {*start, *every};
}

bool should_monitor(int t, const MonitorPlan& plan, bool switched) {
    if (plan.monitor_every < 1) throw ConfigError("monitor_every must be positive");
    if (plan.monitor_start < 0) throw ConfigError("monitor_start must be non-negative");
    if (switched) return false;
    if (t < plan.monitor_start) return false;
    return (t - plan.monitor_start) % plan.monitor_every == 0;
}

SwitchDecision decide_switch(const std::vector<StepRecord>& steps, DecisionMode mode,
                             ModelBackend* backend, const TaskSpec& task,
                             const std::string& screen_text,
                             const std::string& history_text) {
    if (mode == DecisionMode::Model) {
        if (!backend) throw ConfigError("model-mode switching needs a backend");
        auto prompt =
            assemble_prompt(task.instruction, screen_text, history_text, TemplateId::Switcher);
        InvokeResult reply = backend->invoke(prompt);
        std::string verdict = trim_copy(reply.text);
        if (verdict == "CLOUD")
            return {Verdict::Cloud, SwitchBasis::ModelVerdict, "model said CLOUD"};
        if (verdict == "DEVICE")
            return {Verdict::Device, SwitchBasis::ModelVerdict, "model said DEVICE"};
        return {Verdict::Device, SwitchBasis::ModelVerdict,
                "nonconforming verdict: " + verdict.substr(0, 40)};
    }

    if (steps.empty()) return {Verdict::Device, std::nullopt, "no steps yet"};

    // Same action, same screen, no movement, at least twice in a row.
    const StepRecord& last = steps.back();
    if (!last.action_text.empty()) {
        int run = 0;
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
            if (it->action_text != last.action_text) break;
            if (it->screen_before != it->screen_after) break;
            if (it->screen_before != last.screen_before) break;
            ++run;
        }
        if (run >= 2)
            return {Verdict::Cloud, SwitchBasis::RuleRepetition,
                    "action '" + last.action_text + "' repeated " + std::to_string(run) +
                        " times with no screen change"};
    }

    int stalled = 0;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (!it->flags.ineffective) break;
        ++stalled;
    }
    if (stalled >= 3)
        return {Verdict::Cloud, SwitchBasis::RuleNoProgress,
                std::to_string(stalled) + " ineffective steps in a row"};

    int malformed = 0;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (it->conformity.k >= 3) break;
        ++malformed;
    }
    if (malformed >= 2)
        return {Verdict::Cloud, SwitchBasis::RuleQuality,
                std::to_string(malformed) + " malformed turns in a row"};

    return {Verdict::Device, std::nullopt, "no rule fired"};
}

EpisodeOutcome run_episode(const TaskSpec& task, const AppPack& pack,
                           ModelBackend& device, ModelBackend& cloud,
                           const OrchestratorConfig& config) {
    EpisodeOutcome outcome;
    EpisodeResult& result = outcome.result;
    result.task_id = task.id;

    EpisodeState env = reset(task, pack);
    ModelBackend* decision =
        config.decision_backend ? config.decision_backend : &cloud;

    std::string failure;
    if (config.plan_override) {
        outcome.plan = *config.plan_override;
    } else {
        try {
            outcome.plan = assess_complexity(task, config.assessor_mode, decision,
                                             &outcome.plan_fallback);
        } catch (const BackendError& e) {
            failure = std::string("backend failure: ") + e.what();
        }
    }
    if (outcome.plan.monitor_start < 0 || outcome.plan.monitor_every < 1)
        throw ConfigError("invalid monitoring plan");

    History history(config.history_window);
    bool switched = false;

    while (failure.empty() && !env.finished && !env.terminated) {
        const int t = env.t;
        StepRecord rec;
        rec.t = t;

        if (config.arm == Arm::Collaborative && !outcome.steps.empty() &&
            should_monitor(t, outcome.plan, switched)) {
            rec.monitor_fired = true;
            std::string screen_text = render_screen_text(current_screen(env, pack));
            SwitchDecision decision_made;
            try {
                decision_made = decide_switch(outcome.steps, config.switcher_mode,
                                              decision, task, screen_text,
                                              history.render());
            } catch (const BackendError& e) {
                failure = std::string("backend failure: ") + e.what();
                break;
            }
            if (config.switcher_mode == DecisionMode::Model) result.monitor_calls += 1;
            rec.switch_decision = decision_made;
            if (decision_made.verdict == Verdict::Cloud) {
                switched = true;
                result.switched_at = t;
            }
        }

        const bool use_cloud =
            config.arm == Arm::CloudOnly || (config.arm == Arm::Collaborative && switched);
        ModelBackend& backend = use_cloud ? cloud : device;
        rec.tier = use_cloud ? Tier::Cloud : Tier::Device;
        rec.backend = backend.name();
        rec.screen_before = env.current_screen_id;

        std::string screen_text = render_screen_text(current_screen(env, pack));
        auto prompt =
            assemble_prompt(task.instruction, screen_text, history.render(),
                            use_cloud ? TemplateId::Cloud : TemplateId::Device);

        auto begun = std::chrono::steady_clock::now();
        InvokeResult reply;
        try {
            reply = backend.invoke(prompt);
        } catch (const BackendError& e) {
            failure = std::string("backend failure: ") + e.what();
            break;
        }
        if (!config.deterministic) {
            rec.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - begun)
                              .count();
        }
        rec.retries = reply.retries;
        rec.raw = reply.text;

        ParsedTurn parsed = parse_turn(reply.text);
        rec.conformity = parsed.report;
        ActionParseResult call = parse_action(parsed.turn.call_text);
        if (call.ok()) {
            rec.action = call.action;
            rec.action_text = render_action(*call.action);
            rec.flags = apply(env, *call.action, pack, task.max_steps);
        } else {
            rec.action_text = parsed.turn.call_text;
            rec.flags = advance_failed(env, task.max_steps);
        }
        rec.screen_after = env.current_screen_id;
        history.append(summarize_for_history(parsed), rec.action_text);

        if (use_cloud) result.cloud_steps += 1;
        else result.device_steps += 1;
        outcome.steps.push_back(std::move(rec));
    }

    result.total_steps = env.t;
    if (!failure.empty()) result.termination = failure;
    else if (env.finished) result.termination = "finished";
    else result.termination = env.termination_reason;
    result.success = env.finished && evaluate(task, env, pack);
    outcome.final_state = std::move(env);
    return outcome;
}

}  // namespace tandem
