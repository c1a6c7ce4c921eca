#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/action.hpp"

namespace tandem {

enum class ElementKind { Button, Input, Toggle, ListItem, Link, Text };

std::string to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from_name(std::string_view name);

// One numbered widget on a screen. `state` holds "on"/"off" for toggles and
// the current text for inputs; `focused` only applies to inputs.
struct Element {
    int index = 0;
    ElementKind kind = ElementKind::Button;
    std::string label;
    std::string state;
    bool focused = false;

    bool operator==(const Element&) const = default;
};

struct Screen {
    std::string id;
    std::vector<Element> elements;
    std::string back_target;  // screen id, empty = back is unmapped here
    std::string home_target;  // screen id, empty = app home screen
};

// (screen, canonical action text) -> destination screen.
struct TransitionRule {
    std::string screen;
    std::string action;
    std::string goto_screen;
};

struct AppDef {
    std::string name;
    std::string initial_screen;
    std::vector<Screen> screens;
    std::vector<TransitionRule> rules;
};

enum class TaskKind { Operation, Query };
enum class RiskTier { Critical, High, Medium, Low };

std::string to_string(TaskKind kind);
std::string to_string(RiskTier tier);
std::optional<RiskTier> risk_tier_from_name(std::string_view name);

// Success checks for operation tasks.
struct SuccessCondition {
    enum class Type { ElementState, CurrentScreen };
    Type type = Type::CurrentScreen;
    std::string screen;
    int index = 0;       // ElementState only
    std::string state;   // ElementState only
};

// Reference policy rule: when every condition matches an element on the
// current screen, emit `call`. Rules are tried in order, first match wins.
struct GoldCondition {
    std::string label;
    std::optional<ElementKind> kind;
    std::optional<std::string> state;
    std::optional<bool> focused;
};

struct GoldRule {
    std::vector<GoldCondition> when;
    std::string call;
};

struct TaskSpec {
    std::string id;
    std::string instruction;
    std::string app;
    TaskKind kind = TaskKind::Operation;
    RiskTier risk = RiskTier::Medium;
    int max_steps = 25;
    std::vector<SuccessCondition> conditions;  // operation
    std::string gold_answer;                   // query
    double answer_threshold = 0.7;             // query
    std::vector<GoldRule> gold;
};

// A declarative app-and-task bundle loaded from JSON.
struct AppPack {
    std::string id;
    int version = 1;
    std::vector<AppDef> apps;
    std::vector<TaskSpec> tasks;
    uint64_t content_hash = 0;

    const AppDef* find_app(std::string_view name) const;
    const Screen* find_screen(std::string_view app, std::string_view screen_id) const;
    const TaskSpec* find_task(std::string_view task_id) const;
};

// Loads and validates a pack; ConfigError on any structural problem.
AppPack load_pack(const std::string& path);
AppPack parse_pack(std::string_view json_text, std::string_view source_name);

// FNV-1a 64 over raw bytes; this is what load_pack stores in content_hash.
uint64_t fnv1a64(std::string_view bytes);

// Recomputes content_hash for packs built in code rather than from a file.
void seal_pack(AppPack& pack);

// Step-level validation failures; these never abort an episode.
struct ValidationError {
    enum class Kind { NoSuchElement, NoFocusedField };
    Kind kind = Kind::NoSuchElement;
    std::string message;
};

struct StepFlags {
    bool ineffective = false;
    bool parse_failed = false;
    std::optional<ValidationError> validation;
};

// Mutable episode state. Element states are overlays keyed by
// (screen id, index); the pack itself is never mutated.
struct EpisodeState {
    std::string task_id;
    std::string app;
    std::string current_screen_id;
    std::map<std::pair<std::string, int>, std::string> element_state;
    std::map<std::pair<std::string, int>, bool> element_focused;
    int t = 0;
    bool finished = false;
    std::string finish_message;
    bool terminated = false;
    std::string termination_reason;
};

EpisodeState reset(const TaskSpec& task, const AppPack& pack);
EpisodeState reset(std::string_view task_id, const AppPack& pack);

// Current screen with episode overlays applied.
Screen current_screen(const EpisodeState& state, const AppPack& pack);

// Applies one action: state effects, transition lookup, step count, budget.
StepFlags apply(EpisodeState& state, const Action& action, const AppPack& pack,
                int max_steps);

// Burns a step for a turn whose call never parsed.
StepFlags advance_failed(EpisodeState& state, int max_steps);

// "{index}. {kind} '{label}'" lines, one per element, plus state/focus
// suffixes; "(no interactive elements)" for an empty screen.
std::string render_screen_text(const Screen& screen);

// Inverse of render_screen_text; ConfigError on a line it cannot read.
std::vector<Element> parse_screen_listing(std::string_view listing);

// Task success. Requires finished == true; operation tasks check their
// conditions, query tasks compare finish_message against the gold answer.
bool evaluate(const TaskSpec& task, const EpisodeState& state, const AppPack& pack);

// Checks an action against a screen without applying it.
std::optional<ValidationError> validate_action(const Action& action, const Screen& screen);

}  // namespace tandem
