#include "tandem/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/protocol.hpp"

namespace tandem {

using nlohmann::json;

std::string to_string(Tier tier) { return tier == Tier::Device ? "device" : "cloud"; }

ScriptedBackend::ScriptedBackend(std::string name, Tier tier,
                                 std::vector<std::string> turns, ExhaustPolicy policy)
    : name_(std::move(name)), tier_(tier), turns_(std::move(turns)), policy_(policy) {
    if (turns_.empty()) throw ConfigError("scripted backend '" + name_ + "' has no turns");
}

InvokeResult ScriptedBackend::invoke(const std::vector<Message>&) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= turns_.size()) {
        if (policy_ == ExhaustPolicy::Error)
            throw BackendError(BackendError::Kind::ScriptExhausted,
                               "scripted backend '" + name_ + "' ran out of turns after " +
                                   std::to_string(turns_.size()));
        return {turns_.back(), 0};
    }
    return {turns_[cursor_++], 0};
}

size_t ScriptedBackend::cursor() const {
    std::lock_guard lock(mutex_);
    return cursor_;
}

void ScriptedBackend::rewind() {
    std::lock_guard lock(mutex_);
    cursor_ = 0;
}

namespace {

// Pulls the screen listing back out of an assembled prompt's user message.
std::vector<Element> elements_from_prompt(const std::vector<Message>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role != "user") continue;
        const std::string& content = it->content;
        size_t start = content.find("Screen:\n");
        if (start == std::string::npos) return {};
        start += 8;
        size_t end = content.find("\n\nHistory:\n", start);
        if (end == std::string::npos) end = content.size();
        return parse_screen_listing(
            std::string_view(content).substr(start, end - start));
    }
    return {};
}

std::string join_labels(const std::vector<Element>& elements) {
    std::string out;
    size_t shown = 0;
    for (const auto& el : elements) {
        if (shown == 3) {
            out += ", ...";
            break;
        }
        if (shown) out += ", ";
        out += el.label.empty() ? to_string(el.kind) : el.label;
        ++shown;
    }
    return out;
}

}  // namespace

std::optional<std::string> match_gold_rule(const TaskSpec& task,
                                           const std::vector<Element>& elements) {
    for (const auto& rule : task.gold) {
        bool all = true;
        for (const auto& cond : rule.when) {
            bool found = false;
            for (const auto& el : elements) {
                if (el.label != cond.label) continue;
                if (cond.kind && el.kind != *cond.kind) continue;
                if (cond.state && el.state != *cond.state) continue;
                if (cond.focused && el.focused != *cond.focused) continue;
                found = true;
                break;
            }
            if (!found) {
                all = false;
                break;
            }
        }
        if (all) return rule.call;
    }
    return std::nullopt;
}

std::string compose_turn(const TaskSpec& task, const std::vector<Element>& elements,
                         const std::string& call) {
    std::string reasoning;
    reasoning += "- Task: " + task.instruction + "\n";
    reasoning += "- The screen lists " + std::to_string(elements.size()) +
                 " interactive elements.\n";
    reasoning += "- Best next step: " + call;

    StateAssessment assessment;
    assessment.current_state = elements.empty()
                                   ? "No interactive elements visible."
                                   : "Visible elements: " + join_labels(elements) + ".";
    assessment.task_progress = "In progress.";
    assessment.next_required_action = call;
    assessment.expected_outcome = "Screen updates after " + call + ".";
    assessment.potential_issues = "None expected.";
    return render_turn(reasoning, assessment, call);
}

GoldPolicyBackend::GoldPolicyBackend(std::string name, Tier tier, TaskSpec task,
                                     std::optional<int> gold_prefix)
    : name_(std::move(name)), tier_(tier), task_(std::move(task)),
      gold_prefix_(gold_prefix) {}

InvokeResult GoldPolicyBackend::invoke(const std::vector<Message>& messages) {
    std::lock_guard lock(mutex_);
    std::vector<Element> elements = elements_from_prompt(messages);
    std::string call = "wait(5)";
    if (!gold_prefix_ || calls_ < *gold_prefix_) {
        if (auto matched = match_gold_rule(task_, elements)) call = *matched;
    }
    ++calls_;
    return {compose_turn(task_, elements, call), 0};
}

std::string base64_encode(std::string_view bytes) {
    static constexpr char table[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
        i += 3;
    }
    size_t rest = bytes.size() - i;
    if (rest == 1) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

namespace {

struct SplitEndpoint {
    std::string base;  // scheme://host[:port]
    std::string prefix;
};

SplitEndpoint split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("endpoint must include a scheme: " + endpoint);
    size_t path = endpoint.find('/', scheme + 3);
    if (path == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path), prefix};
}

}  // namespace

RemoteBackend::RemoteBackend(std::string name, Tier tier, RemoteConfig config)
    : name_(std::move(name)), tier_(tier), config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw ConfigError("remote backend '" + name_ + "' needs an endpoint");
    if (config_.model.empty())
        throw ConfigError("remote backend '" + name_ + "' needs a model name");
    if (config_.retries < 0) throw ConfigError("retries must be non-negative");
}

InvokeResult RemoteBackend::invoke(const std::vector<Message>& messages) {
    std::string token;
    if (!config_.credential_env.empty()) {
        const char* value = std::getenv(config_.credential_env.c_str());
        if (!value || !*value)
            throw BackendError(BackendError::Kind::Auth,
                               "credential environment variable '" +
                                   config_.credential_env + "' is not set");
        token = value;
    }

    json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = json::array();
    for (const auto& message : messages)
        body["messages"].push_back({{"role", message.role}, {"content", message.content}});

    if (!config_.image_file.empty() && !body["messages"].empty()) {
        std::ifstream in(config_.image_file, std::ios::binary);
        if (!in) throw ConfigError("cannot open image file: " + config_.image_file);
        std::ostringstream buf;
        buf << in.rdbuf();
        json& last = body["messages"].back();
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", last["content"]}});
        parts.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:image/png;base64," + base64_encode(buf.str())}}}});
        last["content"] = parts;
    }
    const std::string payload = body.dump();

    SplitEndpoint split = split_endpoint(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (split.base.rfind("https://", 0) == 0)
        throw BackendError(BackendError::Kind::Transport,
                           "https endpoints need a TLS-enabled build");
#endif
    httplib::Client client(split.base);
    auto seconds = static_cast<time_t>(config_.timeout_s);
    auto micros = static_cast<time_t>((config_.timeout_s - double(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    const std::string path = split.prefix + "/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            double delay = config_.backoff_base_s * double(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        if (wire_log_) wire_log_("send", payload);
        httplib::Result res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (wire_log_) wire_log_("recv", res->body);
        if (res->status == 401 || res->status == 403)
            throw BackendError(BackendError::Kind::Auth,
                               "endpoint rejected credentials (HTTP " +
                                   std::to_string(res->status) + ")");
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw BackendError(BackendError::Kind::Transport,
                               "HTTP " + std::to_string(res->status) + ": " + res->body);

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message"))
            throw BackendError(BackendError::Kind::Transport,
                               "malformed chat-completions response");
        const json& message = reply["choices"][0]["message"];
        if (!message.contains("content") || !message["content"].is_string())
            throw BackendError(BackendError::Kind::Transport,
                               "malformed chat-completions response");
        return {message["content"].get<std::string>(), attempt};
    }
    throw BackendError(BackendError::Kind::Transport,
                       "request failed after " + std::to_string(config_.retries + 1) +
                           " attempts: " + last_error);
}

}  // namespace tandem
