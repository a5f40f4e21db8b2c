#pragma once

// Deterministic offline backend. It recovers the policy text (and, in two-input
// mode, the attribute list) from a rendered prompt and emits one MESP line per
// policy sentence that yields at least one attribute.
//
//  - two-input: for each declared attribute, the first allowed value that occurs
//    in the sentence as a whole word; a sentence naming no value falls back to
//    the first value of the first attribute that has values.
//  - one-input: for each keyword Role, Department, System, Day, Time, the
//    capitalized word after "Key:" / "Key is", else the one before the keyword,
//    else the one after it.
//
// Sentences containing a negation (not, cannot, never, deny, ...) get Label Deny.

#include "lmn/llm_client.hpp"
#include "lmn/mesp.hpp"
#include "lmn/prompts.hpp"
#include "lmn/text.hpp"

#include <array>
#include <cctype>
#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmn {

namespace mock_detail {

inline bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); }

inline std::vector<std::string_view> sentences(std::string_view nlacp) {
    std::vector<std::string_view> out;
    for (auto line : text::split_lines(nlacp)) {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            const bool end = i == line.size();
            const bool stop = !end && (line[i] == '.' || line[i] == '!' || line[i] == '?' || line[i] == ';') &&
                              (i + 1 == line.size() || text::is_space(line[i + 1]));
            if (end || stop) {
                auto s = text::trim(line.substr(start, i - start));
                if (!s.empty()) out.push_back(s);
                start = i + 1;
            }
        }
    }
    return out;
}

inline bool contains_word(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (!text::iequals(haystack.substr(i, needle.size()), needle)) continue;
        const bool left_ok = i == 0 || !is_word_char(haystack[i - 1]);
        const bool right_ok = i + needle.size() == haystack.size() || !is_word_char(haystack[i + needle.size()]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

inline bool is_negated(std::string_view sentence) {
    static constexpr std::array<std::string_view, 11> negations{
        "not", "cannot", "can't", "never", "deny", "denied", "prohibited", "forbidden", "no", "disallowed", "mustn't"};
    for (auto w : negations)
        if (contains_word(sentence, w)) return true;
    return false;
}

// Keys and values that the MESP grammar can carry unambiguously.
inline bool emittable_key(std::string_view k) {
    return !k.empty() && k.find_first_of("():,\n") == std::string_view::npos && !text::iequals(k, "Label") &&
           !text::iequals(k, "Operation");
}

inline bool emittable_value(std::string_view v) {
    return !text::trim(v).empty() && v.find_first_of(")\n") == std::string_view::npos;
}

inline std::string strip_punct(std::string_view w) {
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.front()))) w.remove_prefix(1);
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back()))) w.remove_suffix(1);
    return std::string(w);
}

inline bool capitalized(std::string_view w, bool allow_digit) {
    if (w.empty()) return false;
    const auto c = static_cast<unsigned char>(w.front());
    return std::isupper(c) || (allow_digit && std::isdigit(c));
}

inline constexpr std::array<std::string_view, 5> kKeywords{"Role", "Department", "System", "Day", "Time"};

inline bool is_keyword(std::string_view w) {
    for (auto k : kKeywords)
        if (text::iequals(w, k)) return true;
    return false;
}

inline bool is_filler(std::string_view w) {
    static constexpr std::array<std::string_view, 14> fillers{"The", "A", "An", "This", "That", "Any", "All",
                                                              "Each", "Every", "Is", "Of", "Only", "In", "On"};
    for (auto f : fillers)
        if (text::iequals(w, f)) return true;
    return false;
}

using Pairs = std::vector<std::pair<std::string, std::string>>;

inline Pairs extract_with_vocabulary(std::string_view sentence, const AttributeVocabulary& vocab) {
    Pairs pairs;
    for (const auto& entry : vocab.entries()) {
        if (!emittable_key(entry.attribute.name())) continue;
        for (const auto& v : entry.allowed_values) {
            if (emittable_value(v) && contains_word(sentence, v)) {
                pairs.emplace_back(entry.attribute.name(), v);
                break;
            }
        }
    }
    if (pairs.empty()) {
        for (const auto& entry : vocab.entries()) {
            if (!emittable_key(entry.attribute.name())) continue;
            for (const auto& v : entry.allowed_values) {
                if (!emittable_value(v)) continue;
                pairs.emplace_back(entry.attribute.name(), v);
                return pairs;
            }
        }
    }
    return pairs;
}

inline bool usable_value(std::string_view w, bool allow_digit) {
    return capitalized(w, allow_digit) && !is_keyword(w) && !is_filler(w) && emittable_value(w) &&
           w.find_first_of("(:,") == std::string_view::npos;
}

// "Role: Professor" / "Role is Professor" take the following word; otherwise
// "Gradebook system" takes the preceding one, falling back to the following one.
inline Pairs extract_by_keyword(std::string_view sentence) {
    std::vector<std::string_view> raw;
    for (auto w : text::split(sentence, ' '))
        if (!text::trim(w).empty()) raw.push_back(text::trim(w));
    std::vector<std::string> words;
    for (auto w : raw) words.push_back(strip_punct(w));

    Pairs pairs;
    for (auto key : kKeywords) {
        const bool allow_digit = key == "Time";
        std::string found;
        for (std::size_t i = 0; i < words.size() && found.empty(); ++i) {
            if (!text::iequals(words[i], key)) continue;
            std::size_t next = i + 1;
            bool explicit_value = raw[i].back() == ':';
            if (next < words.size() && (raw[next] == ":" || raw[next] == "=" || text::iequals(raw[next], "is"))) {
                explicit_value = true;
                ++next;
            }
            const bool has_next = next < words.size() && usable_value(words[next], allow_digit);
            const bool has_prev = i > 0 && usable_value(words[i - 1], allow_digit);
            if (explicit_value && has_next)
                found = words[next];
            else if (has_prev)
                found = words[i - 1];
            else if (has_next)
                found = words[next];
        }
        if (!found.empty()) pairs.emplace_back(std::string(key), found);
    }
    return pairs;
}

} // namespace mock_detail

/// The mock backend's response for `prompt`. Same prompt, same bytes.
inline std::string mock_generate(std::string_view prompt) {
    std::string nlacp;
    std::optional<std::string> attributes;
    if (auto inputs = unrender_prompt(prompt)) {
        nlacp = std::move(inputs->nlacp_text);
        attributes = std::move(inputs->attributes_text);
    } else {
        nlacp = std::string(prompt);
    }
    if (text::trim(nlacp).empty()) return {};

    std::optional<AttributeVocabulary> vocab;
    if (attributes) vocab = parse_attributes_file(*attributes).vocabulary;

    std::string out;
    std::size_t index = 0;
    for (auto sentence : mock_detail::sentences(nlacp)) {
        auto pairs = vocab ? mock_detail::extract_with_vocabulary(sentence, *vocab)
                           : mock_detail::extract_by_keyword(sentence);
        if (pairs.empty()) continue;
        out += std::to_string(++index);
        out += ": (Label: ";
        out += mock_detail::is_negated(sentence) ? "Deny" : "Allow";
        out += ")";
        for (const auto& [k, v] : pairs) out += ", (" + k + ": " + v + ")";
        out += '\n';
    }
    return out;
}

class MockBackend final : public CompletionBackend {
public:
    std::string id() const override { return "mock"; }

protected:
    CompletionResult do_complete(std::string_view prompt, const CompletionConfig&) const override {
        const auto start = std::chrono::steady_clock::now();
        CompletionResult r;
        r.text = mock_generate(prompt);
        r.backend_id = id();
        r.latency = std::chrono::steady_clock::now() - start;
        return r;
    }
};

} // namespace lmn
