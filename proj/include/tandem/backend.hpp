#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tandem/env.hpp"
#include "tandem/prompt.hpp"

namespace tandem {

enum class Tier { Device, Cloud };

std::string to_string(Tier tier);

struct InvokeResult {
    std::string text;
    int retries = 0;
};

// One model slot. Implementations must be safe to call from the episode
// loop; they may throw BackendError when the turn cannot be produced.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string name() const = 0;
    virtual Tier tier() const = 0;
    virtual InvokeResult invoke(const std::vector<Message>& messages) = 0;
};

// Replays a fixed list of raw turns in order.
class ScriptedBackend : public ModelBackend {
public:
    enum class ExhaustPolicy { RepeatLast, Error };

    ScriptedBackend(std::string name, Tier tier, std::vector<std::string> turns,
                    ExhaustPolicy policy = ExhaustPolicy::RepeatLast);

    std::string name() const override { return name_; }
    Tier tier() const override { return tier_; }
    InvokeResult invoke(const std::vector<Message>& messages) override;

    size_t cursor() const;
    void rewind();

private:
    std::string name_;
    Tier tier_;
    std::vector<std::string> turns_;
    ExhaustPolicy policy_;
    mutable std::mutex mutex_;
    size_t cursor_ = 0;
};

// Deterministic reference agent. It reads the screen listing back out of the
// prompt, fires the task's first matching gold rule, and wraps the call in a
// fully conforming turn. With a prefix limit it degrades to wait(5) turns
// after that many calls, which is how a stalling device agent is modeled.
class GoldPolicyBackend : public ModelBackend {
public:
    GoldPolicyBackend(std::string name, Tier tier, TaskSpec task,
                      std::optional<int> gold_prefix = std::nullopt);

    std::string name() const override { return name_; }
    Tier tier() const override { return tier_; }
    InvokeResult invoke(const std::vector<Message>& messages) override;

private:
    std::string name_;
    Tier tier_;
    TaskSpec task_;
    std::optional<int> gold_prefix_;
    mutable std::mutex mutex_;
    int calls_ = 0;
};

// Picks the first gold rule whose conditions all match some element.
// Returns the canonical call, or nothing when no rule fires.
std::optional<std::string> match_gold_rule(const TaskSpec& task,
                                           const std::vector<Element>& elements);

// Builds a conforming three-block turn around a call, with an assessment
// derived from the screen listing.
std::string compose_turn(const TaskSpec& task, const std::vector<Element>& elements,
                         const std::string& call);

struct RemoteConfig {
    std::string endpoint;        // scheme://host[:port][/prefix]
    std::string model;
    std::string credential_env;  // empty = send no auth header
    double timeout_s = 120.0;
    int retries = 2;             // extra attempts after the first
    double temperature = 0.0;
    double backoff_base_s = 1.0;
    std::string image_file;      // optional screenshot attached as base64
};

// OpenAI-style chat-completions client over HTTP.
class RemoteBackend : public ModelBackend {
public:
    using WireLog = std::function<void(std::string_view direction, std::string_view body)>;

    RemoteBackend(std::string name, Tier tier, RemoteConfig config);

    std::string name() const override { return name_; }
    Tier tier() const override { return tier_; }
    InvokeResult invoke(const std::vector<Message>& messages) override;

    void set_wire_log(WireLog log) { wire_log_ = std::move(log); }

private:
    std::string name_;
    Tier tier_;
    RemoteConfig config_;
    WireLog wire_log_;
};

std::string base64_encode(std::string_view bytes);

}  // namespace tandem
