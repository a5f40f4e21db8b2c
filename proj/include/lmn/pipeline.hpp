#pragma once

// NLACP -> MESP conversion: render the prompt, call the backend, then refine the
// raw reply (parse, normalize, re-serialize). Produces MESP.txt and
// gpt_attribute.txt and packs them into a ZIP.

#include "lmn/abac.hpp"
#include "lmn/llm_client.hpp"
#include "lmn/mesp.hpp"
#include "lmn/prompts.hpp"
#include "lmn/text.hpp"
#include "lmn/zip.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmn {

class ConversionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyPolicyError : public ConversionError {
public:
    EmptyPolicyError() : ConversionError("NLACP text is blank") {}
};

inline constexpr std::string_view kMespEntryName = "MESP.txt";
inline constexpr std::string_view kAttributesEntryName = "gpt_attribute.txt";

struct ConversionRequest {
    Mode mode = Mode::LMN1;
    std::string nlacp_text;
    std::optional<std::string> attributes_text;
    int prompt_number = kDefaultPrompt;
    CompletionConfig completion_config;
};

struct ConversionTiming {
    std::chrono::nanoseconds total{0};
    std::chrono::nanoseconds llm{0};
};

struct ConversionOutput {
    Mode mode = Mode::LMN1;
    std::string mesp_text;
    std::string attributes_text;
    Policy policy;
    // Parser and vocabulary-conformance diagnostics; line numbers refer to raw_model_text.
    std::vector<ParseDiagnostic> diagnostics;
    // Diagnostics from reading the uploaded attributes file (LMN2 only).
    std::vector<ParseDiagnostic> input_diagnostics;
    std::string raw_model_text;
    std::string backend_id;
    ConversionTiming timing;
};

inline ConversionOutput run_conversion(const ConversionRequest& req, const CompletionBackend& backend) {
    const auto start = std::chrono::steady_clock::now();

    if (text::trim(req.nlacp_text).empty()) throw EmptyPolicyError();
    if (req.mode == Mode::LMN2 && !req.attributes_text)
        throw ConversionError("lmn2 conversion requires an attributes file");
    if (req.mode == Mode::LMN1 && req.attributes_text)
        throw ConversionError("lmn1 conversion takes no attributes file");

    const PromptId prompt_id(req.prompt_number, req.mode);
    const auto prompt = req.mode == Mode::LMN2 ? render_prompt(prompt_id, req.nlacp_text, *req.attributes_text)
                                               : render_prompt(prompt_id, req.nlacp_text);

    ConversionOutput out;
    out.mode = req.mode;

    const auto defaults = KeyCategoryMap::defaults();
    auto keymap = defaults;
    std::optional<AttributeVocabulary> input_vocab;
    if (req.mode == Mode::LMN2) {
        auto parsed = parse_attributes_file(*req.attributes_text, defaults);
        input_vocab = std::move(parsed.vocabulary);
        out.input_diagnostics = std::move(parsed.diagnostics);
        keymap = keymap_with_vocabulary(defaults, *input_vocab);
    }

    auto completion = backend.complete(prompt, req.completion_config);
    out.timing.llm = completion.latency;
    out.backend_id = completion.backend_id;
    out.raw_model_text = std::move(completion.text);

    auto parsed = parse_mesp(out.raw_model_text, keymap);
    out.policy = std::move(parsed.policy);
    out.diagnostics = std::move(parsed.diagnostics);

    if (input_vocab) {
        for (const auto& v : validate_rules(out.policy, *input_vocab).violations) {
            const auto line = parsed.rule_lines.at(v.rule_index - 1);
            out.diagnostics.push_back({line, Severity::Warning, v.describe(),
                                       std::string(text::split_lines(out.raw_model_text).at(line - 1))});
        }
        std::stable_sort(out.diagnostics.begin(), out.diagnostics.end(),
                         [](const auto& a, const auto& b) { return a.line_number < b.line_number; });
    }

    out.mesp_text = serialize_rules(out.policy);
    out.attributes_text = serialize_vocabulary(input_vocab ? *input_vocab : vocabulary_from_rules(out.policy), defaults);

    out.timing.total = std::chrono::steady_clock::now() - start;
    if (out.timing.total < out.timing.llm) out.timing.total = out.timing.llm;
    return out;
}

inline std::string package_zip(const ConversionOutput& out) {
    return zip::write_archive({
        {std::string(kMespEntryName), out.mesp_text},
        {std::string(kAttributesEntryName), out.attributes_text},
    });
}

} // namespace lmn
