#include "tandem/prompt.hpp"

#include <array>
#include <stdexcept>

#include "tandem/errors.hpp"
#include "tandem/template_data.hpp"

namespace tandem {
namespace {

constexpr std::string_view kOutputFormatSlot = "{{OUTPUT_FORMAT}}";

std::string expand(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    size_t pos = 0;
    while (true) {
        size_t slot = raw.find(kOutputFormatSlot, pos);
        if (slot == std::string_view::npos) {
            out.append(raw.substr(pos));
            break;
        }
        out.append(raw.substr(pos, slot - pos));
        out.append(detail::kOutputFormatTxt);
        pos = slot + kOutputFormatSlot.size();
    }
    return out;
}

const char* raw_text(TemplateId id) {
    switch (id) {
        case TemplateId::Device: return detail::kDeviceTxt;
        case TemplateId::Cloud: return detail::kCloudTxt;
        case TemplateId::Assessor: return detail::kAssessorTxt;
        case TemplateId::Switcher: return detail::kSwitcherTxt;
        case TemplateId::Datagen: return detail::kDatagenTxt;
    }
    throw ConfigError("invalid template id");
}

}  // namespace

int template_bundle_version() { return detail::kTemplateDataVersion; }

const std::string& template_text(TemplateId id) {
    static const std::array<std::string, 5> expanded = {
        expand(detail::kDeviceTxt),   expand(detail::kCloudTxt),
        expand(detail::kAssessorTxt), expand(detail::kSwitcherTxt),
        expand(detail::kDatagenTxt),
    };
    (void)raw_text(id);
    return expanded[static_cast<size_t>(id)];
}

const std::string& output_format_text() {
    static const std::string text = detail::kOutputFormatTxt;
    return text;
}

TemplateId template_id_from_name(std::string_view name) {
    if (name == "device") return TemplateId::Device;
    if (name == "cloud") return TemplateId::Cloud;
    if (name == "assessor") return TemplateId::Assessor;
    if (name == "switcher") return TemplateId::Switcher;
    if (name == "datagen") return TemplateId::Datagen;
    throw ConfigError("unknown template: " + std::string(name));
}

std::string template_name(TemplateId id) {
    switch (id) {
        case TemplateId::Device: return "device";
        case TemplateId::Cloud: return "cloud";
        case TemplateId::Assessor: return "assessor";
        case TemplateId::Switcher: return "switcher";
        case TemplateId::Datagen: return "datagen";
    }
    return "unknown";
}

std::vector<Message> assemble_prompt(std::string_view task_instruction,
                                     std::string_view screen_text,
                                     std::string_view history_text,
                                     TemplateId id) {
    std::string user;
    user.reserve(task_instruction.size() + screen_text.size() + history_text.size() + 48);
    user += "Task: ";
    user += task_instruction;
    user += "\n\nScreen:\n";
    user += screen_text;
    user += "\n\nHistory:\n";
    user += history_text;
    return {Message{"system", template_text(id)}, Message{"user", std::move(user)}};
}

}  // namespace tandem
