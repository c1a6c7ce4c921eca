#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tandem {

// One chat message; role is "system" or "user" here.
struct Message {
    std::string role;
    std::string content;

    bool operator==(const Message&) const = default;
};

// The prompt bundle ships one template per role in the runtime.
enum class TemplateId {
    Device,    // on-device action agent
    Cloud,     // escalation action agent
    Assessor,  // pre-task monitoring-plan planner
    Switcher,  // device-vs-cloud takeover judge
    Datagen,   // reasoning-trace synthesis helper
};

// Bundle version; bump when any template text changes.
int template_bundle_version();

// Expanded template text ({{OUTPUT_FORMAT}} already substituted).
const std::string& template_text(TemplateId id);

// Shared output-format fragment, as substituted into the agent templates.
const std::string& output_format_text();

// Maps config-file names ("device", "cloud", ...) to ids.
// Throws ConfigError for unknown names.
TemplateId template_id_from_name(std::string_view name);
std::string template_name(TemplateId id);

// Builds the two-message prompt for one model call: the template as system
// message plus a user message carrying task, screen listing, and history.
std::vector<Message> assemble_prompt(std::string_view task_instruction,
                                     std::string_view screen_text,
                                     std::string_view history_text,
                                     TemplateId id);

}  // namespace tandem
