#pragma once

// The six prompt templates, each in a one-input (LMN1) and a two-input (LMN2)
// variant. Templates carry {{NLACP}} and, for LMN2, {{ATTRIBUTES}} slots that are
// replaced byte-for-byte with the uploaded file contents.

#include <algorithm>
#include <array>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmn {

enum class Mode { LMN1, LMN2 };

inline std::string_view to_string(Mode m) { return m == Mode::LMN1 ? "lmn1" : "lmn2"; }

inline std::ostream& operator<<(std::ostream& os, Mode m) { return os << to_string(m); }

inline Mode parse_mode(std::string_view s) {
    if (s == "lmn1" || s == "LMN1") return Mode::LMN1;
    if (s == "lmn2" || s == "LMN2") return Mode::LMN2;
    throw std::invalid_argument("mode must be lmn1 or lmn2, got '" + std::string(s) + "'");
}

class PromptError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kPromptCount = 6;
inline constexpr int kDefaultPrompt = 1;
inline constexpr std::string_view kNlacpSlot = "{{NLACP}}";
inline constexpr std::string_view kAttributesSlot = "{{ATTRIBUTES}}";

class PromptId {
public:
    PromptId(int number, Mode mode) : number_(number), mode_(mode) {
        if (number < 1 || number > kPromptCount)
            throw PromptError("prompt number must be in 1.." + std::to_string(kPromptCount) + ", got " +
                              std::to_string(number));
    }

    int number() const { return number_; }
    Mode mode() const { return mode_; }

    friend bool operator==(const PromptId&, const PromptId&) = default;

private:
    int number_;
    Mode mode_;
};

struct PromptTemplate {
    PromptId id;
    std::string_view text;
};

namespace detail {

// Indexed [number - 1][mode]; LF line breaks, no trailing newline.
inline constexpr std::array<std::array<std::string_view, 2>, kPromptCount> kTemplates{{
    {{
        "Dynamically extract attributes and generate structured ABAC rules from the following natural "
        "language descriptions of access control policies:\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)\n"
        "Input:\n"
        "{{NLACP}}",

        "Convert the following natural language access control policies into structured ABAC rules using "
        "the specified attributes: {{ATTRIBUTES}}.\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)\n"
        "Input:\n"
        "{{NLACP}}",
    }},
    {{
        "Here are the natural language access control policies:\n"
        "{{NLACP}}\n"
        "Dynamically extract and apply attributes to format them as shown below:\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)",

        "Here are the natural language access control policies:\n"
        "{{NLACP}}\n"
        "Convert these using the attributes:\n"
        "{{ATTRIBUTES}}.\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)",
    }},
    {{
        "Please convert the following descriptions into structured ABAC rules by extracting necessary "
        "attributes:\n"
        "Policies:\n"
        "{{NLACP}}\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)",

        "Please convert the following descriptions into structured ABAC rules using provided attributes:\n"
        "Attributes:\n"
        "{{ATTRIBUTES}}\n"
        "Policies:\n"
        "{{NLACP}}\n"
        "Example Format:\n"
        "1: (Label: Allow), (Role: User), (Resource: System)",
    }},
    {{
        "Policies:\n"
        "{{NLACP}}\n"
        "Extract attributes and format rules.",

        "Attributes:\n"
        "{{ATTRIBUTES}}\n"
        "Policies:\n"
        "{{NLACP}}\n"
        "Format rules with attributes.",
    }},
    {{
        "Here are some access control policies:\n"
        "{{NLACP}}\n"
        "Extract necessary attributes from these descriptions and format them into structured ABAC rules.\n"
        "Ensure each rule is clear and includes all important elements.",

        "Here are some access control policies:\n"
        "{{NLACP}}\n"
        "Using the attributes provided below, format these policies into structured ABAC rules.\n"
        "Attributes List:\n"
        "{{ATTRIBUTES}}\n"
        "Please ensure each rule is clearly defined with all relevant details.",
    }},
    {{
        "Please dynamically extract critical attributes from the following detailed access control policies "
        "and convert them into well-structured Attribute-Based Access Control (ABAC) rules.\n"
        "Policies to be formatted:\n"
        "{{NLACP}}\n"
        "Focus on extracting roles, permissions, resources, and any conditions specified within the text. "
        "Format these elements into clear and actionable ABAC rules that could be directly implemented in a "
        "real-world security system.",

        "Please analyze the following detailed access control policies and use the specified attributes to "
        "format these descriptions into structured Attribute-Based Access Control (ABAC) rules.\n"
        "Given Attributes:\n"
        "{{ATTRIBUTES}}\n"
        "Policies to be formatted:\n"
        "{{NLACP}}\n"
        "Each ABAC rule should encapsulate all critical details such as roles, permissions, and conditions "
        "applicable to the access control scenario. Ensure the rules are well-defined and actionable in a "
        "real-world system security context.",
    }},
}};

} // namespace detail

inline PromptTemplate prompt_template(PromptId id) {
    return {id, detail::kTemplates[static_cast<std::size_t>(id.number() - 1)][id.mode() == Mode::LMN1 ? 0 : 1]};
}

/// All twelve templates in (number, mode) order, LMN1 before LMN2.
inline std::vector<PromptTemplate> list_prompts() {
    std::vector<PromptTemplate> out;
    for (int n = 1; n <= kPromptCount; ++n)
        for (Mode m : {Mode::LMN1, Mode::LMN2}) out.push_back(prompt_template(PromptId(n, m)));
    return out;
}

/// Substitutes the slots in one pass, so slot-like text inside the inputs is left alone.
inline std::string render_prompt(PromptId id, std::string_view nlacp_text,
                                 std::optional<std::string_view> attributes_text = std::nullopt) {
    if (id.mode() == Mode::LMN2 && !attributes_text)
        throw PromptError("prompt " + std::to_string(id.number()) + " (lmn2) requires attributes text");
    if (id.mode() == Mode::LMN1 && attributes_text)
        throw PromptError("prompt " + std::to_string(id.number()) + " (lmn1) takes no attributes text");

    const auto tmpl = prompt_template(id).text;
    std::string out;
    out.reserve(tmpl.size() + nlacp_text.size() + (attributes_text ? attributes_text->size() : 0));
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        if (tmpl.substr(open, kNlacpSlot.size()) == kNlacpSlot) {
            out.append(nlacp_text);
            pos = open + kNlacpSlot.size();
        } else if (tmpl.substr(open, kAttributesSlot.size()) == kAttributesSlot) {
            out.append(*attributes_text);
            pos = open + kAttributesSlot.size();
        } else {
            out.append("{{");
            pos = open + 2;
        }
    }
    return out;
}

struct RenderedInputs {
    PromptId id;
    std::string nlacp_text;
    std::optional<std::string> attributes_text;
};

/// Inverse of render_prompt: recovers the prompt id and slot contents when `prompt`
/// was rendered from one of the templates. Literal text following a slot is
/// located at its first occurrence, so inputs that embed template text may split
/// differently from how they were rendered.
inline std::optional<RenderedInputs> unrender_prompt(std::string_view prompt) {
    for (const auto& tmpl : list_prompts()) {
        // Split the template into literals separated by slots.
        std::vector<std::string_view> literals;
        std::vector<std::string_view> slots;
        std::string_view rest = tmpl.text;
        for (;;) {
            const auto a = rest.find(kNlacpSlot);
            const auto b = rest.find(kAttributesSlot);
            const auto at = std::min(a, b);
            if (at == std::string_view::npos) {
                literals.push_back(rest);
                break;
            }
            literals.push_back(rest.substr(0, at));
            const auto slot = at == a ? kNlacpSlot : kAttributesSlot;
            slots.push_back(slot);
            rest.remove_prefix(at + slot.size());
        }
        const auto head = literals.front();
        const auto tail = literals.back();
        if (prompt.size() < head.size() + tail.size() || prompt.substr(0, head.size()) != head ||
            prompt.substr(prompt.size() - tail.size()) != tail)
            continue;

        std::string_view body = prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
        std::vector<std::string_view> values;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
            const auto sep = literals[i + 1];
            const auto at = body.find(sep);
            if (at == std::string_view::npos) {
                ok = false;
                break;
            }
            values.push_back(body.substr(0, at));
            body.remove_prefix(at + sep.size());
        }
        if (!ok) continue;
        values.push_back(body);

        RenderedInputs out{tmpl.id, {}, std::nullopt};
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (slots[i] == kNlacpSlot)
                out.nlacp_text = std::string(values[i]);
            else
                out.attributes_text = std::string(values[i]);
        }
        return out;
    }
    return std::nullopt;
}

} // namespace lmn
