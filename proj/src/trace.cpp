#include "tandem/trace.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"

namespace tandem {

using nlohmann::json;

namespace {

std::string hash_to_hex(uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

uint64_t hash_from_hex(const std::string& text, std::string_view source) {
    if (text.size() != 16) throw ConfigError(std::string(source) + ": bad pack_hash");
    return std::stoull(text, nullptr, 16);
}

Arm arm_from_name(const std::string& name, std::string_view source) {
    if (name == "collaborative") return Arm::Collaborative;
    if (name == "cloud_only") return Arm::CloudOnly;
    if (name == "device_only") return Arm::DeviceOnly;
    throw ConfigError(std::string(source) + ": unknown arm '" + name + "'");
}

DecisionMode mode_from_name(const std::string& name, std::string_view source) {
    if (name == "rules") return DecisionMode::Rules;
    if (name == "model") return DecisionMode::Model;
    throw ConfigError(std::string(source) + ": unknown decision mode '" + name + "'");
}

Tier tier_from_name(const std::string& name, std::string_view source) {
    if (name == "device") return Tier::Device;
    if (name == "cloud") return Tier::Cloud;
    throw ConfigError(std::string(source) + ": unknown tier '" + name + "'");
}

SwitchBasis basis_from_name(const std::string& name, std::string_view source) {
    if (name == "rule_repetition") return SwitchBasis::RuleRepetition;
    if (name == "rule_no_progress") return SwitchBasis::RuleNoProgress;
    if (name == "rule_quality") return SwitchBasis::RuleQuality;
    if (name == "model_verdict") return SwitchBasis::ModelVerdict;
    throw ConfigError(std::string(source) + ": unknown switch basis '" + name + "'");
}

json step_to_json(const StepRecord& rec) {
    json j;
    j["type"] = "step";
    j["t"] = rec.t;
    j["tier"] = to_string(rec.tier);
    j["backend"] = rec.backend;
    j["raw"] = rec.raw;
    j["action_text"] = rec.action_text;
    j["action_ok"] = rec.action.has_value();
    j["k"] = rec.conformity.k;
    j["c"] = rec.conformity.c;
    j["blocks"] = {rec.conformity.blocks_present[0], rec.conformity.blocks_present[1],
                   rec.conformity.blocks_present[2]};
    j["out_of_order"] = rec.conformity.out_of_order;
    j["screen_before"] = rec.screen_before;
    j["screen_after"] = rec.screen_after;
    j["monitor_fired"] = rec.monitor_fired;
    if (rec.switch_decision) {
        j["switch_verdict"] = to_string(rec.switch_decision->verdict);
        if (rec.switch_decision->basis)
            j["switch_basis"] = to_string(*rec.switch_decision->basis);
        j["switch_detail"] = rec.switch_decision->detail;
    }
    j["ineffective"] = rec.flags.ineffective;
    j["parse_failed"] = rec.flags.parse_failed;
    if (rec.flags.validation) j["validation"] = rec.flags.validation->message;
    j["retries"] = rec.retries;
    j["wall_ms"] = rec.wall_ms;
    return j;
}

StepRecord step_from_json(const json& j, std::string_view source) {
    StepRecord rec;
    rec.t = j.at("t").get<int>();
    rec.tier = tier_from_name(j.at("tier").get<std::string>(), source);
    rec.backend = j.value("backend", "");
    rec.raw = j.value("raw", "");
    rec.action_text = j.value("action_text", "");
    if (j.value("action_ok", false)) {
        ActionParseResult parsed = parse_action(rec.action_text);
        if (!parsed.ok())
            throw ConfigError(std::string(source) + ": traced action does not parse: " +
                              rec.action_text);
        rec.action = parsed.action;
    }
    rec.conformity.k = j.value("k", 0);
    rec.conformity.c = j.value("c", 0LL);
    if (j.contains("blocks")) {
        for (size_t i = 0; i < 3; ++i)
            rec.conformity.blocks_present[i] = j["blocks"].at(i).get<bool>();
    }
    rec.conformity.out_of_order = j.value("out_of_order", false);
    rec.screen_before = j.value("screen_before", "");
    rec.screen_after = j.value("screen_after", "");
    rec.monitor_fired = j.value("monitor_fired", false);
    if (j.contains("switch_verdict")) {
        SwitchDecision decision;
        decision.verdict =
            j["switch_verdict"].get<std::string>() == "cloud" ? Verdict::Cloud : Verdict::Device;
        if (j.contains("switch_basis"))
            decision.basis = basis_from_name(j["switch_basis"].get<std::string>(), source);
        decision.detail = j.value("switch_detail", "");
        rec.switch_decision = decision;
    }
    rec.flags.ineffective = j.value("ineffective", false);
    rec.flags.parse_failed = j.value("parse_failed", false);
    if (j.contains("validation"))
        rec.flags.validation =
            ValidationError{ValidationError::Kind::NoSuchElement, j["validation"]};
    rec.retries = j.value("retries", 0);
    rec.wall_ms = j.value("wall_ms", 0.0);
    return rec;
}

json result_to_json(const EpisodeResult& result) {
    json j;
    j["type"] = "result";
    j["task"] = result.task_id;
    j["success"] = result.success;
    j["total_steps"] = result.total_steps;
    j["device_steps"] = result.device_steps;
    j["cloud_steps"] = result.cloud_steps;
    j["monitor_calls"] = result.monitor_calls;
    if (result.switched_at) j["switched_at"] = *result.switched_at;
    j["termination"] = result.termination;
    return j;
}

EpisodeResult result_from_json(const json& j) {
    EpisodeResult result;
    result.task_id = j.value("task", "");
    result.success = j.value("success", false);
    result.total_steps = j.value("total_steps", 0);
    result.device_steps = j.value("device_steps", 0);
    result.cloud_steps = j.value("cloud_steps", 0);
    result.monitor_calls = j.value("monitor_calls", 0);
    if (j.contains("switched_at")) result.switched_at = j["switched_at"].get<int>();
    result.termination = j.value("termination", "");
    return result;
}

}  // namespace

std::string trace_to_jsonl(const TraceHeader& header, const std::vector<StepRecord>& steps,
                           const EpisodeResult& result) {
    json h;
    h["type"] = "header";
    h["version"] = header.version;
    h["suite"] = header.suite;
    h["task"] = header.task_id;
    h["pack"] = header.pack_id;
    h["pack_hash"] = hash_to_hex(header.pack_hash);
    h["seed"] = header.seed;
    h["arm"] = to_string(header.arm);
    h["monitor_start"] = header.plan.monitor_start;
    h["monitor_every"] = header.plan.monitor_every;
    h["plan_fallback"] = header.plan_fallback;
    h["assessor_mode"] = to_string(header.assessor_mode);
    h["switcher_mode"] = to_string(header.switcher_mode);
    h["deterministic"] = header.deterministic;

    std::string out = h.dump();
    out += '\n';
    for (const auto& step : steps) {
        out += step_to_json(step).dump();
        out += '\n';
    }
    out += result_to_json(result).dump();
    out += '\n';
    return out;
}

void write_trace(const std::string& path, const TraceHeader& header,
                 const std::vector<StepRecord>& steps, const EpisodeResult& result) {
    std::filesystem::path fs_path(path);
    if (fs_path.has_parent_path()) std::filesystem::create_directories(fs_path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write trace file: " + path);
    out << trace_to_jsonl(header, steps, result);
}

LoadedTrace parse_trace(std::string_view jsonl, std::string_view source_name) {
    LoadedTrace trace;
    std::vector<json> lines;
    size_t pos = 0;
    while (pos < jsonl.size()) {
        size_t eol = jsonl.find('\n', pos);
        std::string_view line =
            jsonl.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                            : eol - pos);
        pos = eol == std::string_view::npos ? jsonl.size() : eol + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded())
            throw ConfigError(std::string(source_name) + ": line " +
                              std::to_string(lines.size() + 1) + " is not valid JSON");
        lines.push_back(std::move(parsed));
    }
    if (lines.size() < 2)
        throw ConfigError(std::string(source_name) + ": trace needs header and result lines");
    const json& h = lines.front();
    if (h.value("type", "") != "header")
        throw ConfigError(std::string(source_name) + ": first line is not a header");
    trace.header.version = h.value("version", 0);
    if (trace.header.version != 1)
        throw ConfigError(std::string(source_name) + ": unsupported trace version");
    trace.header.suite = h.value("suite", "");
    trace.header.task_id = h.value("task", "");
    trace.header.pack_id = h.value("pack", "");
    trace.header.pack_hash = hash_from_hex(h.value("pack_hash", ""), source_name);
    trace.header.seed = h.value("seed", 0ULL);
    trace.header.arm = arm_from_name(h.value("arm", "collaborative"), source_name);
    trace.header.plan.monitor_start = h.value("monitor_start", 0);
    trace.header.plan.monitor_every = h.value("monitor_every", 1);
    trace.header.plan_fallback = h.value("plan_fallback", false);
    trace.header.assessor_mode = mode_from_name(h.value("assessor_mode", "rules"), source_name);
    trace.header.switcher_mode = mode_from_name(h.value("switcher_mode", "rules"), source_name);
    trace.header.deterministic = h.value("deterministic", false);

    const json& r = lines.back();
    if (r.value("type", "") != "result")
        throw ConfigError(std::string(source_name) + ": last line is not a result");
    trace.result = result_from_json(r);

    for (size_t i = 1; i + 1 < lines.size(); ++i) {
        if (lines[i].value("type", "") != "step")
            throw ConfigError(std::string(source_name) + ": line " + std::to_string(i + 1) +
                              " is not a step");
        trace.steps.push_back(step_from_json(lines[i], source_name));
    }
    return trace;
}

LoadedTrace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str(), path);
}

ReplayVerdict replay_trace(const LoadedTrace& trace, const AppPack& pack) {
    auto diverge = [](const std::string& what) { return ReplayVerdict{false, what}; };

    if (pack.id != trace.header.pack_id)
        return diverge("pack id mismatch: trace '" + trace.header.pack_id + "' vs '" +
                       pack.id + "'");
    if (pack.content_hash != trace.header.pack_hash)
        return diverge("pack hash mismatch: trace " + std::to_string(trace.header.pack_hash) +
                       " vs " + std::to_string(pack.content_hash));
    const TaskSpec* task = pack.find_task(trace.header.task_id);
    if (!task) return diverge("task '" + trace.header.task_id + "' not in pack");

    EpisodeState env = reset(*task, pack);
    for (const auto& step : trace.steps) {
        std::string at = "step " + std::to_string(step.t);
        if (env.current_screen_id != step.screen_before)
            return diverge(at + ": screen_before mismatch: trace '" + step.screen_before +
                           "' vs replay '" + env.current_screen_id + "'");
        StepFlags flags;
        if (step.action) flags = apply(env, *step.action, pack, task->max_steps);
        else flags = advance_failed(env, task->max_steps);
        if (env.current_screen_id != step.screen_after)
            return diverge(at + ": screen_after mismatch: trace '" + step.screen_after +
                           "' vs replay '" + env.current_screen_id + "'");
        if (flags.ineffective != step.flags.ineffective)
            return diverge(at + ": ineffective flag mismatch");
        if (flags.parse_failed != step.flags.parse_failed)
            return diverge(at + ": parse_failed flag mismatch");
    }

    if (env.t != trace.result.total_steps)
        return diverge("total_steps mismatch: trace " +
                       std::to_string(trace.result.total_steps) + " vs replay " +
                       std::to_string(env.t));
    bool success = env.finished && evaluate(*task, env, pack);
    if (success != trace.result.success)
        return diverge(std::string("success mismatch: trace ") +
                       (trace.result.success ? "true" : "false") + " vs replay " +
                       (success ? "true" : "false"));
    return {};
}

ReplayVerdict replay_file(const std::string& path, const AppPack& pack) {
    return replay_trace(read_trace(path), pack);
}

}  // namespace tandem
