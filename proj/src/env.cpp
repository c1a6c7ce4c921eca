#include "tandem/env.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/similarity.hpp"

namespace tandem {

using nlohmann::json;

std::string to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::Button: return "button";
        case ElementKind::Input: return "input";
        case ElementKind::Toggle: return "toggle";
        case ElementKind::ListItem: return "list_item";
        case ElementKind::Link: return "link";
        case ElementKind::Text: return "text";
    }
    return "button";
}

std::optional<ElementKind> element_kind_from_name(std::string_view name) {
    if (name == "button") return ElementKind::Button;
    if (name == "input") return ElementKind::Input;
    if (name == "toggle") return ElementKind::Toggle;
    if (name == "list_item") return ElementKind::ListItem;
    if (name == "link") return ElementKind::Link;
    if (name == "text") return ElementKind::Text;
    return std::nullopt;
}

std::string to_string(TaskKind kind) {
    return kind == TaskKind::Operation ? "operation" : "query";
}

std::string to_string(RiskTier tier) {
    switch (tier) {
        case RiskTier::Critical: return "critical";
        case RiskTier::High: return "high";
        case RiskTier::Medium: return "medium";
        case RiskTier::Low: return "low";
    }
    return "medium";
}

std::optional<RiskTier> risk_tier_from_name(std::string_view name) {
    if (name == "critical") return RiskTier::Critical;
    if (name == "high") return RiskTier::High;
    if (name == "medium") return RiskTier::Medium;
    if (name == "low") return RiskTier::Low;
    return std::nullopt;
}

const AppDef* AppPack::find_app(std::string_view name) const {
    for (const auto& app : apps)
        if (app.name == name) return &app;
    return nullptr;
}

const Screen* AppPack::find_screen(std::string_view app, std::string_view screen_id) const {
    const AppDef* def = find_app(app);
    if (!def) return nullptr;
    for (const auto& screen : def->screens)
        if (screen.id == screen_id) return &screen;
    return nullptr;
}

const TaskSpec* AppPack::find_task(std::string_view task_id) const {
    for (const auto& task : tasks)
        if (task.id == task_id) return &task;
    return nullptr;
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t hash = 14695981039346656037ull;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ull;
    }
    return hash;
}

namespace {

[[noreturn]] void pack_error(std::string_view source, const std::string& what) {
    throw ConfigError(std::string(source) + ": " + what);
}

std::string canonical_call(std::string_view source, const std::string& text,
                           const std::string& where) {
    ActionParseResult parsed = parse_action(text);
    if (!parsed.ok())
        pack_error(source, where + ": bad action '" + text + "': " + parsed.error->message);
    return render_action(*parsed.action);
}

Element parse_element(std::string_view source, const json& j, const std::string& where) {
    Element el;
    if (!j.contains("index") || !j["index"].is_number_integer())
        pack_error(source, where + ": element needs an integer index");
    el.index = j["index"].get<int>();
    std::string kind = j.value("kind", "button");
    auto parsed_kind = element_kind_from_name(kind);
    if (!parsed_kind) pack_error(source, where + ": unknown element kind '" + kind + "'");
    el.kind = *parsed_kind;
    el.label = j.value("label", "");
    el.state = j.value("state", el.kind == ElementKind::Toggle ? "off" : "");
    el.focused = j.value("focused", false);
    if (el.kind == ElementKind::Toggle && el.state != "on" && el.state != "off")
        pack_error(source, where + ": toggle state must be on or off");
    if (el.focused && el.kind != ElementKind::Input)
        pack_error(source, where + ": only inputs can be focused");
    return el;
}

TaskSpec parse_task(std::string_view source, const json& j, const AppPack& pack) {
    TaskSpec task;
    task.id = j.value("id", "");
    if (task.id.empty()) pack_error(source, "task without id");
    const std::string where = "task '" + task.id + "'";
    task.instruction = j.value("instruction", "");
    if (task.instruction.empty()) pack_error(source, where + ": empty instruction");
    task.app = j.value("app", "");
    if (!pack.find_app(task.app))
        pack_error(source, where + ": unknown app '" + task.app + "'");

    std::string kind = j.value("kind", "operation");
    if (kind == "operation") task.kind = TaskKind::Operation;
    else if (kind == "query") task.kind = TaskKind::Query;
    else pack_error(source, where + ": unknown kind '" + kind + "'");

    std::string risk = j.value("risk", "medium");
    auto tier = risk_tier_from_name(risk);
    if (!tier) pack_error(source, where + ": unknown risk tier '" + risk + "'");
    task.risk = *tier;

    task.max_steps = j.value("max_steps", 25);
    if (task.max_steps < 1) pack_error(source, where + ": max_steps must be positive");

    if (!j.contains("success") || !j["success"].is_object())
        pack_error(source, where + ": missing success object");
    const json& success = j["success"];
    if (task.kind == TaskKind::Operation) {
        if (!success.contains("conditions") || !success["conditions"].is_array() ||
            success["conditions"].empty())
            pack_error(source, where + ": operation tasks need success conditions");
        for (const json& jc : success["conditions"]) {
            SuccessCondition cond;
            std::string type = jc.value("type", "");
            cond.screen = jc.value("screen", "");
            const Screen* screen = pack.find_screen(task.app, cond.screen);
            if (!screen)
                pack_error(source, where + ": condition references unknown screen '" +
                                       cond.screen + "'");
            if (type == "element_state") {
                cond.type = SuccessCondition::Type::ElementState;
                cond.index = jc.value("index", 0);
                cond.state = jc.value("state", "");
                bool found = false;
                for (const auto& el : screen->elements)
                    if (el.index == cond.index) found = true;
                if (!found)
                    pack_error(source, where + ": condition index " +
                                           std::to_string(cond.index) + " not on screen '" +
                                           cond.screen + "'");
            } else if (type == "current_screen") {
                cond.type = SuccessCondition::Type::CurrentScreen;
            } else {
                pack_error(source, where + ": unknown condition type '" + type + "'");
            }
            task.conditions.push_back(std::move(cond));
        }
    } else {
        task.gold_answer = success.value("gold_answer", "");
        if (task.gold_answer.empty())
            pack_error(source, where + ": query tasks need a gold_answer");
        task.answer_threshold = success.value("threshold", 0.7);
        if (task.answer_threshold < 0.0 || task.answer_threshold > 1.0)
            pack_error(source, where + ": threshold must be in [0,1]");
    }

    if (j.contains("gold")) {
        for (const json& jr : j["gold"]) {
            GoldRule rule;
            if (jr.contains("when")) {
                for (const json& jw : jr["when"]) {
                    GoldCondition cond;
                    cond.label = jw.value("label", "");
                    if (jw.contains("kind")) {
                        auto k = element_kind_from_name(jw["kind"].get<std::string>());
                        if (!k) pack_error(source, where + ": gold rule has bad element kind");
                        cond.kind = *k;
                    }
                    if (jw.contains("state")) cond.state = jw["state"].get<std::string>();
                    if (jw.contains("focused")) cond.focused = jw["focused"].get<bool>();
                    rule.when.push_back(std::move(cond));
                }
            }
            rule.call = canonical_call(source, jr.value("do", ""), where + " gold rule");
            task.gold.push_back(std::move(rule));
        }
    }
    return task;
}

AppPack parse_pack_json(const json& root, std::string_view source) {
    AppPack pack;
    if (!root.is_object()) pack_error(source, "top level must be an object");
    pack.version = root.value("version", 0);
    if (pack.version < 1) pack_error(source, "missing or invalid version");
    pack.id = root.value("id", "");
    if (pack.id.empty()) pack_error(source, "missing pack id");
    if (!root.contains("apps") || !root["apps"].is_array() || root["apps"].empty())
        pack_error(source, "pack needs at least one app");

    for (const json& ja : root["apps"]) {
        AppDef app;
        app.name = ja.value("name", "");
        if (app.name.empty()) pack_error(source, "app without name");
        if (pack.find_app(app.name)) pack_error(source, "duplicate app '" + app.name + "'");
        const std::string where = "app '" + app.name + "'";

        if (!ja.contains("screens") || !ja["screens"].is_array() || ja["screens"].empty())
            pack_error(source, where + ": needs at least one screen");
        for (const json& js : ja["screens"]) {
            Screen screen;
            screen.id = js.value("id", "");
            if (screen.id.empty()) pack_error(source, where + ": screen without id");
            screen.back_target = js.value("back", "");
            screen.home_target = js.value("home", "");
            if (js.contains("elements")) {
                for (const json& je : js["elements"])
                    screen.elements.push_back(
                        parse_element(source, je, where + " screen '" + screen.id + "'"));
            }
            std::sort(screen.elements.begin(), screen.elements.end(),
                      [](const Element& a, const Element& b) { return a.index < b.index; });
            for (size_t i = 0; i < screen.elements.size(); ++i) {
                if (screen.elements[i].index != static_cast<int>(i) + 1)
                    pack_error(source, where + " screen '" + screen.id +
                                           "': element indices must run 1..N");
            }
            int focused = 0;
            for (const auto& el : screen.elements)
                if (el.focused) ++focused;
            if (focused > 1)
                pack_error(source,
                           where + " screen '" + screen.id + "': multiple focused inputs");
            app.screens.push_back(std::move(screen));
        }

        // Screen ids must be unique across the whole pack so that overlays,
        // traces, and transition rules can use them without qualification.
        for (const auto& screen : app.screens) {
            int count = 0;
            for (const auto& other : app.screens)
                if (other.id == screen.id) ++count;
            if (count > 1) pack_error(source, where + ": duplicate screen '" + screen.id + "'");
            for (const auto& prior : pack.apps)
                for (const auto& other : prior.screens)
                    if (other.id == screen.id)
                        pack_error(source, "screen id '" + screen.id +
                                               "' appears in more than one app");
        }

        app.initial_screen = ja.value("initial_screen", "");
        bool has_initial = false;
        for (const auto& screen : app.screens)
            if (screen.id == app.initial_screen) has_initial = true;
        if (!has_initial)
            pack_error(source, where + ": initial_screen '" + app.initial_screen +
                                   "' is not one of its screens");

        auto known = [&app](const std::string& id) {
            for (const auto& screen : app.screens)
                if (screen.id == id) return true;
            return false;
        };
        for (const auto& screen : app.screens) {
            if (!screen.back_target.empty() && !known(screen.back_target))
                pack_error(source, where + " screen '" + screen.id + "': bad back target");
            if (!screen.home_target.empty() && !known(screen.home_target))
                pack_error(source, where + " screen '" + screen.id + "': bad home target");
        }

        if (ja.contains("rules")) {
            for (const json& jr : ja["rules"]) {
                TransitionRule rule;
                rule.screen = jr.value("screen", "");
                rule.goto_screen = jr.value("goto", "");
                if (!known(rule.screen))
                    pack_error(source, where + ": rule on unknown screen '" + rule.screen + "'");
                if (!known(rule.goto_screen))
                    pack_error(source,
                               where + ": rule goto unknown screen '" + rule.goto_screen + "'");
                rule.action = canonical_call(source, jr.value("action", ""),
                                             where + " rule on '" + rule.screen + "'");
                app.rules.push_back(std::move(rule));
            }
        }
        pack.apps.push_back(std::move(app));
    }

    if (root.contains("tasks")) {
        for (const json& jt : root["tasks"]) {
            TaskSpec task = parse_task(source, jt, pack);
            if (pack.find_task(task.id))
                pack_error(source, "duplicate task '" + task.id + "'");
            pack.tasks.push_back(std::move(task));
        }
    }
    return pack;
}

json pack_to_json(const AppPack& pack) {
    json root;
    root["version"] = pack.version;
    root["id"] = pack.id;
    root["apps"] = json::array();
    for (const auto& app : pack.apps) {
        json ja;
        ja["name"] = app.name;
        ja["initial_screen"] = app.initial_screen;
        ja["screens"] = json::array();
        for (const auto& screen : app.screens) {
            json js;
            js["id"] = screen.id;
            if (!screen.back_target.empty()) js["back"] = screen.back_target;
            if (!screen.home_target.empty()) js["home"] = screen.home_target;
            js["elements"] = json::array();
            for (const auto& el : screen.elements) {
                json je;
                je["index"] = el.index;
                je["kind"] = to_string(el.kind);
                je["label"] = el.label;
                je["state"] = el.state;
                je["focused"] = el.focused;
                js["elements"].push_back(je);
            }
            ja["screens"].push_back(js);
        }
        ja["rules"] = json::array();
        for (const auto& rule : app.rules) {
            json jr;
            jr["screen"] = rule.screen;
            jr["action"] = rule.action;
            jr["goto"] = rule.goto_screen;
            ja["rules"].push_back(jr);
        }
        root["apps"].push_back(ja);
    }
    root["tasks"] = json::array();
    for (const auto& task : pack.tasks) {
        json jt;
        jt["id"] = task.id;
        jt["instruction"] = task.instruction;
        jt["app"] = task.app;
        jt["kind"] = to_string(task.kind);
        jt["risk"] = to_string(task.risk);
        jt["max_steps"] = task.max_steps;
        json js;
        if (task.kind == TaskKind::Operation) {
            js["conditions"] = json::array();
            for (const auto& cond : task.conditions) {
                json jc;
                jc["type"] = cond.type == SuccessCondition::Type::ElementState
                                 ? "element_state"
                                 : "current_screen";
                jc["screen"] = cond.screen;
                if (cond.type == SuccessCondition::Type::ElementState) {
                    jc["index"] = cond.index;
                    jc["state"] = cond.state;
                }
                js["conditions"].push_back(jc);
            }
        } else {
            js["gold_answer"] = task.gold_answer;
            js["threshold"] = task.answer_threshold;
        }
        jt["success"] = js;
        jt["gold"] = json::array();
        for (const auto& rule : task.gold) {
            json jr;
            jr["when"] = json::array();
            for (const auto& cond : rule.when) {
                json jw;
                jw["label"] = cond.label;
                if (cond.kind) jw["kind"] = to_string(*cond.kind);
                if (cond.state) jw["state"] = *cond.state;
                if (cond.focused) jw["focused"] = *cond.focused;
                jr["when"].push_back(jw);
            }
            jr["do"] = rule.call;
            jt["gold"].push_back(jr);
        }
        root["tasks"].push_back(jt);
    }
    return root;
}

const AppDef& app_of(const EpisodeState& state, const AppPack& pack) {
    const AppDef* app = pack.find_app(state.app);
    if (!app) throw ConfigError("episode references unknown app '" + state.app + "'");
    return *app;
}

const Screen& screen_of(const EpisodeState& state, const AppPack& pack) {
    const Screen* screen = pack.find_screen(state.app, state.current_screen_id);
    if (!screen)
        throw ConfigError("episode on unknown screen '" + state.current_screen_id + "'");
    return *screen;
}

const TransitionRule* find_rule(const AppDef& app, const std::string& screen_id,
                                const std::string& canonical) {
    for (const auto& rule : app.rules)
        if (rule.screen == screen_id && rule.action == canonical) return &rule;
    return nullptr;
}

void finish_step(EpisodeState& state, int max_steps) {
    state.t += 1;
    if (!state.finished && !state.terminated && state.t >= max_steps) {
        state.terminated = true;
        state.termination_reason = "step budget";
    }
}

}  // namespace

AppPack parse_pack(std::string_view json_text, std::string_view source_name) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) pack_error(source_name, "invalid JSON");
    AppPack pack = parse_pack_json(root, source_name);
    pack.content_hash = fnv1a64(json_text);
    return pack;
}

AppPack load_pack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open pack file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pack(buf.str(), path);
}

void seal_pack(AppPack& pack) {
    pack.content_hash = 0;
    pack.content_hash = fnv1a64(pack_to_json(pack).dump());
}

EpisodeState reset(const TaskSpec& task, const AppPack& pack) {
    const AppDef* app = pack.find_app(task.app);
    if (!app) throw ConfigError("unknown app: " + task.app);
    EpisodeState state;
    state.task_id = task.id;
    state.app = task.app;
    state.current_screen_id = app->initial_screen;
    for (const auto& screen : app->screens) {
        for (const auto& el : screen.elements) {
            state.element_state[{screen.id, el.index}] = el.state;
            state.element_focused[{screen.id, el.index}] = el.focused;
        }
    }
    return state;
}

EpisodeState reset(std::string_view task_id, const AppPack& pack) {
    const TaskSpec* task = pack.find_task(task_id);
    if (!task) throw ConfigError("unknown task: " + std::string(task_id));
    return reset(*task, pack);
}

Screen current_screen(const EpisodeState& state, const AppPack& pack) {
    Screen screen = screen_of(state, pack);
    for (auto& el : screen.elements) {
        auto key = std::make_pair(screen.id, el.index);
        if (auto it = state.element_state.find(key); it != state.element_state.end())
            el.state = it->second;
        if (auto it = state.element_focused.find(key); it != state.element_focused.end())
            el.focused = it->second;
    }
    return screen;
}

std::optional<ValidationError> validate_action(const Action& action, const Screen& screen) {
    auto has_index = [&screen](int index) {
        for (const auto& el : screen.elements)
            if (el.index == index) return true;
        return false;
    };
    switch (action.kind) {
        case ActionKind::Tap:
        case ActionKind::Swipe:
        case ActionKind::LongPress:
            if (!has_index(*action.index))
                return ValidationError{ValidationError::Kind::NoSuchElement,
                                       "no element with index " +
                                           std::to_string(*action.index) + " on screen '" +
                                           screen.id + "'"};
            return std::nullopt;
        case ActionKind::Text: {
            for (const auto& el : screen.elements)
                if (el.kind == ElementKind::Input && el.focused) return std::nullopt;
            return ValidationError{ValidationError::Kind::NoFocusedField,
                                   "no focused input on screen '" + screen.id + "'"};
        }
        default:
            return std::nullopt;
    }
}

StepFlags apply(EpisodeState& state, const Action& action, const AppPack& pack,
                int max_steps) {
    StepFlags flags;
    const AppDef& app = app_of(state, pack);
    Screen view = current_screen(state, pack);
    const std::string canonical = render_action(action);

    if (auto err = validate_action(action, view)) {
        flags.validation = err;
        flags.ineffective = true;
        finish_step(state, max_steps);
        return flags;
    }

    bool effective = false;
    switch (action.kind) {
        case ActionKind::Tap: {
            for (const auto& el : view.elements) {
                if (el.index != *action.index) continue;
                auto key = std::make_pair(view.id, el.index);
                if (el.kind == ElementKind::Toggle) {
                    state.element_state[key] = el.state == "on" ? "off" : "on";
                    effective = true;
                } else if (el.kind == ElementKind::Input) {
                    for (const auto& other : view.elements)
                        if (other.kind == ElementKind::Input)
                            state.element_focused[{view.id, other.index}] =
                                other.index == el.index;
                    effective = true;
                }
                break;
            }
            if (const auto* rule = find_rule(app, view.id, canonical)) {
                state.current_screen_id = rule->goto_screen;
                effective = true;
            }
            break;
        }
        case ActionKind::Text: {
            for (const auto& el : view.elements) {
                if (el.kind == ElementKind::Input && el.focused) {
                    state.element_state[{view.id, el.index}] = *action.input_str;
                    break;
                }
            }
            effective = true;
            if (const auto* rule = find_rule(app, view.id, canonical))
                state.current_screen_id = rule->goto_screen;
            break;
        }
        case ActionKind::Swipe:
        case ActionKind::LongPress: {
            if (const auto* rule = find_rule(app, view.id, canonical)) {
                state.current_screen_id = rule->goto_screen;
                effective = true;
            }
            break;
        }
        case ActionKind::Back: {
            if (!view.back_target.empty()) {
                state.current_screen_id = view.back_target;
                effective = true;
            } else if (const auto* rule = find_rule(app, view.id, canonical)) {
                state.current_screen_id = rule->goto_screen;
                effective = true;
            }
            break;
        }
        case ActionKind::Home: {
            state.current_screen_id =
                view.home_target.empty() ? app.initial_screen : view.home_target;
            effective = true;
            break;
        }
        case ActionKind::Wait:
            effective = true;
            break;
        case ActionKind::Finish:
            state.finished = true;
            state.finish_message = action.message.value_or("");
            effective = true;
            break;
    }

    flags.ineffective = !effective;
    finish_step(state, max_steps);
    return flags;
}

StepFlags advance_failed(EpisodeState& state, int max_steps) {
    StepFlags flags;
    flags.ineffective = true;
    flags.parse_failed = true;
    finish_step(state, max_steps);
    return flags;
}

std::string render_screen_text(const Screen& screen) {
    if (screen.elements.empty()) return "(no interactive elements)";
    std::string out;
    for (size_t i = 0; i < screen.elements.size(); ++i) {
        const Element& el = screen.elements[i];
        if (i) out += '\n';
        out += std::to_string(el.index);
        out += ". ";
        out += to_string(el.kind);
        out += " '";
        out += el.label;
        out += '\'';
        if (el.kind == ElementKind::Toggle) {
            out += " state=";
            out += el.state;
        } else if (el.kind == ElementKind::Input) {
            out += " state='";
            out += el.state;
            out += "' focused=";
            out += el.focused ? "true" : "false";
        }
    }
    return out;
}

std::vector<Element> parse_screen_listing(std::string_view listing) {
    std::vector<Element> elements;
    if (listing == "(no interactive elements)") return elements;

    auto strip_quotes = [](std::string_view text, const std::string& line) {
        if (text.size() < 2 || text.front() != '\'' || text.back() != '\'')
            throw ConfigError("bad screen listing line: " + line);
        return std::string(text.substr(1, text.size() - 2));
    };

    size_t pos = 0;
    while (pos <= listing.size()) {
        size_t eol = listing.find('\n', pos);
        std::string_view view = listing.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? listing.size() + 1 : eol + 1;
        if (view.empty()) continue;
        const std::string line(view);

        size_t dot = view.find(". ");
        if (dot == std::string_view::npos)
            throw ConfigError("bad screen listing line: " + line);
        Element el;
        try {
            el.index = std::stoi(std::string(view.substr(0, dot)));
        } catch (const std::exception&) {
            throw ConfigError("bad screen listing line: " + line);
        }
        view.remove_prefix(dot + 2);

        size_t space = view.find(' ');
        if (space == std::string_view::npos)
            throw ConfigError("bad screen listing line: " + line);
        auto kind = element_kind_from_name(view.substr(0, space));
        if (!kind) throw ConfigError("bad screen listing line: " + line);
        el.kind = *kind;
        view.remove_prefix(space + 1);

        if (el.kind == ElementKind::Input) {
            size_t focus = view.rfind(" focused=");
            size_t marker = view.rfind(" state='");
            if (focus == std::string_view::npos || marker == std::string_view::npos ||
                marker >= focus)
                throw ConfigError("bad screen listing line: " + line);
            el.label = strip_quotes(view.substr(0, marker), line);
            std::string_view value = view.substr(marker + 8, focus - (marker + 8));
            if (value.empty() || value.back() != '\'')
                throw ConfigError("bad screen listing line: " + line);
            el.state = std::string(value.substr(0, value.size() - 1));
            std::string_view flag = view.substr(focus + 9);
            if (flag == "true") el.focused = true;
            else if (flag == "false") el.focused = false;
            else throw ConfigError("bad screen listing line: " + line);
        } else if (el.kind == ElementKind::Toggle) {
            size_t marker = view.rfind(" state=");
            if (marker == std::string_view::npos)
                throw ConfigError("bad screen listing line: " + line);
            el.label = strip_quotes(view.substr(0, marker), line);
            std::string_view value = view.substr(marker + 7);
            if (value != "on" && value != "off")
                throw ConfigError("bad screen listing line: " + line);
            el.state = std::string(value);
        } else {
            el.label = strip_quotes(view, line);
        }
        elements.push_back(std::move(el));
    }
    return elements;
}

bool evaluate(const TaskSpec& task, const EpisodeState& state, const AppPack& pack) {
    if (!state.finished) return false;
    if (task.kind == TaskKind::Operation) {
        for (const auto& cond : task.conditions) {
            if (cond.type == SuccessCondition::Type::CurrentScreen) {
                if (state.current_screen_id != cond.screen) return false;
            } else {
                auto it = state.element_state.find({cond.screen, cond.index});
                if (it == state.element_state.end() || it->second != cond.state) return false;
            }
        }
        (void)pack;
        return true;
    }
    SimilarityFn sim = similarity_by_id("token_f1");
    return sim(state.finish_message, task.gold_answer) >= task.answer_threshold;
}

}  // namespace tandem
