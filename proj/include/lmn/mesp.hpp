#pragma once

// The MESP line format and the attribute-vocabulary file format.
//
//   MESP.txt        1: (Label: Allow), (Role: User), (Resource: System)
//   attributes.txt  Role: Professor, Student
//                   env.Day: Monday
//                   # comment
//
// Parsing is tolerant: malformed lines are skipped and reported as diagnostics,
// never thrown. Serialization is canonical (Label, user, object, env, Operation).

#include "lmn/abac.hpp"
#include "lmn/text.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lmn {

enum class Severity { Warning, Error };

inline std::string_view to_string(Severity s) { return s == Severity::Warning ? "warning" : "error"; }

struct ParseDiagnostic {
    std::size_t line_number = 1;
    Severity severity = Severity::Warning;
    std::string message;
    std::string raw_line;

    friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ParseDiagnostic& d) {
    return os << "line " << d.line_number << ": " << to_string(d.severity) << ": " << d.message;
}

inline std::size_t count_errors(const std::vector<ParseDiagnostic>& diags) {
    std::size_t n = 0;
    for (const auto& d : diags)
        if (d.severity == Severity::Error) ++n;
    return n;
}

/// Routes MESP keys to attribute categories. `Label` and `Operation` are reserved
/// and never looked up here.
class KeyCategoryMap {
public:
    explicit KeyCategoryMap(AttributeCategory default_category = AttributeCategory::User)
        : default_category_(default_category) {}

    /// Role, Department -> user; System, Resource -> object; Time, Day -> env.
    static KeyCategoryMap defaults() {
        KeyCategoryMap m(AttributeCategory::User);
        m.set("Role", AttributeCategory::User);
        m.set("Department", AttributeCategory::User);
        m.set("System", AttributeCategory::Object);
        m.set("Resource", AttributeCategory::Object);
        m.set("Time", AttributeCategory::Environment);
        m.set("Day", AttributeCategory::Environment);
        return m;
    }

    KeyCategoryMap& set(std::string_view key, AttributeCategory c) {
        mappings_.insert_or_assign(std::string(text::trim(key)), c);
        return *this;
    }

    /// Category for `key`, or nullopt when the key is unmapped.
    std::optional<AttributeCategory> find(std::string_view key) const {
        auto it = mappings_.find(text::trim(key));
        if (it == mappings_.end()) return std::nullopt;
        return it->second;
    }

    AttributeCategory lookup(std::string_view key) const { return find(key).value_or(default_category_); }

    AttributeCategory default_category() const { return default_category_; }
    const std::map<std::string, AttributeCategory, text::ILess>& mappings() const { return mappings_; }

private:
    std::map<std::string, AttributeCategory, text::ILess> mappings_;
    AttributeCategory default_category_;
};

struct ParseResult {
    Policy policy;
    std::vector<ParseDiagnostic> diagnostics;
    std::size_t skipped_lines = 0;
    // Source line of each parsed rule, parallel to policy.rules().
    std::vector<std::size_t> rule_lines;

    std::size_t error_count() const { return count_errors(diagnostics); }
};

namespace detail {

struct RawRuleLine {
    std::string_view numeral;
    std::vector<std::pair<std::string_view, std::string_view>> pairs;
};

// `<int>[:.] (<Key>: <Value>)[, (<Key>: <Value>)]*`; returns an error message on mismatch.
inline std::variant<RawRuleLine, std::string> scan_rule_line(std::string_view line) {
    RawRuleLine out;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    };
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i == 0) return std::string("expected a rule number at the start of the line");
    out.numeral = line.substr(0, i);
    skip_ws();
    if (i >= line.size() || (line[i] != ':' && line[i] != '.'))
        return std::string("expected ':' after the rule number");
    ++i;
    for (;;) {
        skip_ws();
        if (i >= line.size() || line[i] != '(') return std::string("expected '(' to open a (Key: Value) pair");
        ++i;
        auto colon = line.find(':', i);
        auto close = line.find(')', i);
        if (colon == std::string_view::npos || (close != std::string_view::npos && close < colon))
            return std::string("expected ':' inside a (Key: Value) pair");
        if (close == std::string_view::npos) return std::string("unterminated (Key: Value) pair");
        auto key = text::trim(line.substr(i, colon - i));
        auto value = text::trim(line.substr(colon + 1, close - colon - 1));
        if (key.empty()) return std::string("empty key in (Key: Value) pair");
        if (key.find('(') != std::string_view::npos) return std::string("'(' inside a key");
        if (value.empty()) return std::string("empty value for key '" + std::string(key) + "'");
        out.pairs.emplace_back(key, value);
        i = close + 1;
        skip_ws();
        if (i >= line.size()) return out;
        if (line[i] != ',') return std::string("expected ',' between (Key: Value) pairs");
        ++i;
    }
}

inline std::string_view strip_leading_zeros(std::string_view digits) {
    while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
    return digits;
}

} // namespace detail

inline ParseResult parse_mesp(std::string_view input, const KeyCategoryMap& keymap = KeyCategoryMap::defaults()) {
    ParseResult result;
    std::vector<Rule> rules;
    const auto lines = text::split_lines(input);

    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_number = ln + 1;
        const auto raw = lines[ln];
        const auto line = text::trim(raw);
        if (line.empty()) continue;

        std::vector<ParseDiagnostic> line_diags;
        auto diag = [&](Severity s, std::string msg) {
            line_diags.push_back({line_number, s, std::move(msg), std::string(raw)});
        };
        auto reject = [&](std::string msg) {
            // Warnings on a rejected line are dropped; the error explains the skip.
            result.diagnostics.push_back({line_number, Severity::Error, std::move(msg), std::string(raw)});
            ++result.skipped_lines;
        };

        auto scanned = detail::scan_rule_line(line);
        if (auto* err = std::get_if<std::string>(&scanned)) {
            reject(*err);
            continue;
        }
        const auto& parsed = std::get<detail::RawRuleLine>(scanned);

        std::optional<Decision> decision;
        std::optional<std::string> operation;
        std::vector<Clause> by_category[3];
        std::optional<std::string> failure;

        for (const auto& [key, value] : parsed.pairs) {
            if (text::iequals(key, "Label")) {
                Decision d = Decision::Allow;
                if (text::iequals(value, "Deny")) {
                    d = Decision::Deny;
                } else if (!text::iequals(value, "Allow")) {
                    diag(Severity::Warning, "unknown decision '" + std::string(value) + "' mapped to Allow");
                }
                if (decision && *decision != d) {
                    failure = "conflicting Label values";
                    break;
                }
                decision = d;
            } else if (text::iequals(key, "Operation")) {
                if (operation && *operation != value) {
                    failure = "conflicting Operation values";
                    break;
                }
                operation = std::string(value);
            } else {
                auto category = keymap.find(key);
                if (!category) {
                    diag(Severity::Warning, "unknown key '" + std::string(key) + "' routed to " +
                                                std::string(to_string(keymap.default_category())));
                }
                auto& bucket = by_category[static_cast<int>(category.value_or(keymap.default_category()))];
                bool duplicate = false;
                for (const auto& existing : bucket) {
                    if (!text::iequals(existing.attribute.name(), key)) continue;
                    duplicate = true;
                    if (existing.value != value)
                        failure = "attribute '" + std::string(key) + "' given two different values";
                    else
                        diag(Severity::Warning, "repeated clause for '" + std::string(key) + "' dropped");
                }
                if (failure) break;
                if (!duplicate)
                    bucket.push_back({AttributeRef(category.value_or(keymap.default_category()), key),
                                      std::string(value)});
            }
        }
        if (failure) {
            reject(*failure);
            continue;
        }

        if (!decision) {
            diag(Severity::Warning, "no Label; decision defaults to Allow");
            decision = Decision::Allow;
        }
        const std::size_t index = rules.size() + 1;
        if (detail::strip_leading_zeros(parsed.numeral) != std::to_string(index))
            diag(Severity::Warning, "rule number " + std::string(parsed.numeral) + " renumbered to " +
                                        std::to_string(index));

        Rule rule;
        rule.index = index;
        rule.decision = *decision;
        rule.user_cond = Condition(std::move(by_category[0]));
        rule.object_cond = Condition(std::move(by_category[1]));
        rule.env_cond = Condition(std::move(by_category[2]));
        rule.operation = std::move(operation);
        rules.push_back(std::move(rule));
        result.rule_lines.push_back(line_number);
        result.diagnostics.insert(result.diagnostics.end(), line_diags.begin(), line_diags.end());
    }
    result.policy = Policy(std::move(rules));
    return result;
}

inline std::string serialize_rule(const Rule& rule) {
    std::string out = std::to_string(rule.index) + ": (Label: " + std::string(to_string(rule.decision)) + ")";
    for (const Condition* cond : {&rule.user_cond, &rule.object_cond, &rule.env_cond})
        for (const auto& clause : cond->clauses()) out += ", (" + clause.attribute.name() + ": " + clause.value + ")";
    if (rule.operation) out += ", (Operation: " + *rule.operation + ")";
    return out;
}

inline std::string serialize_rules(const Policy& policy) {
    std::string out;
    for (const auto& rule : policy.rules()) {
        out += serialize_rule(rule);
        out += '\n';
    }
    return out;
}

struct AttributesParseResult {
    AttributeVocabulary vocabulary;
    std::vector<ParseDiagnostic> diagnostics;
};

namespace detail {

inline std::optional<AttributeCategory> strip_category_prefix(std::string_view& name) {
    static constexpr std::pair<std::string_view, AttributeCategory> prefixes[] = {
        {"user.", AttributeCategory::User},
        {"object.", AttributeCategory::Object},
        {"env.", AttributeCategory::Environment},
        {"environment.", AttributeCategory::Environment},
    };
    for (const auto& [prefix, category] : prefixes) {
        if (text::starts_with_icase(name, prefix)) {
            name.remove_prefix(prefix.size());
            name = text::trim(name);
            return category;
        }
    }
    return std::nullopt;
}

} // namespace detail

inline AttributesParseResult parse_attributes_file(std::string_view input,
                                                   const KeyCategoryMap& keymap = KeyCategoryMap::defaults()) {
    AttributesParseResult result;
    const auto lines = text::split_lines(input);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = text::trim(lines[ln]);
        if (line.empty() || line.front() == '#') continue;
        // "(Role: Professor, Student)" is accepted as "Role: Professor, Student".
        if (line.size() >= 2 && line.front() == '(' && line.back() == ')') line = text::trim(line.substr(1, line.size() - 2));

        const auto colon = line.find(':');
        std::string_view name = text::trim(line.substr(0, colon));
        auto category = detail::strip_category_prefix(name);
        if (name.empty()) {
            result.diagnostics.push_back({ln + 1, Severity::Error, "attribute line has an empty name",
                                          std::string(lines[ln])});
            continue;
        }
        std::set<std::string> values;
        if (colon != std::string_view::npos) {
            for (auto v : text::split(line.substr(colon + 1), ',')) {
                v = text::trim(v);
                if (!v.empty()) values.emplace(v);
            }
        }
        result.vocabulary.add(AttributeRef(category.value_or(keymap.lookup(name)), name), values);
    }
    return result;
}

/// Writes a vocabulary in the attributes-file grammar. A category prefix is
/// emitted only where the keymap would route the bare name elsewhere, so
/// parse_attributes_file(serialize_vocabulary(v)) == v for the same keymap.
inline std::string serialize_vocabulary(const AttributeVocabulary& vocab,
                                        const KeyCategoryMap& keymap = KeyCategoryMap::defaults()) {
    std::string out;
    for (const auto& entry : vocab.entries()) {
        const auto& attr = entry.attribute;
        if (keymap.lookup(attr.name()) != attr.category()) {
            out += to_string(attr.category());
            out += '.';
        }
        out += attr.name();
        bool first = true;
        for (const auto& v : entry.allowed_values) {
            out += first ? ": " : ", ";
            out += v;
            first = false;
        }
        out += '\n';
    }
    return out;
}

/// Keymap that additionally routes every vocabulary attribute to its declared category.
inline KeyCategoryMap keymap_with_vocabulary(KeyCategoryMap base, const AttributeVocabulary& vocab) {
    for (const auto& e : vocab.entries()) base.set(e.attribute.name(), e.attribute.category());
    return base;
}

enum class ViolationKind { UnknownAttribute, ValueNotAllowed };

inline std::string_view to_string(ViolationKind k) {
    return k == ViolationKind::UnknownAttribute ? "unknown attribute" : "value not allowed";
}

struct Violation {
    std::size_t rule_index = 1;
    ViolationKind kind = ViolationKind::UnknownAttribute;
    std::string attribute;
    std::string value;

    std::string describe() const {
        std::string s = "rule " + std::to_string(rule_index) + ": " + std::string(to_string(kind)) + " '" + attribute + "'";
        if (kind == ViolationKind::ValueNotAllowed) s += " = '" + value + "'";
        return s;
    }

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(ViolationKind k) const {
        std::size_t n = 0;
        for (const auto& v : violations)
            if (v.kind == k) ++n;
        return n;
    }
};

/// Checks every clause against the vocabulary by attribute name (case-insensitive).
/// An attribute with an empty allowed set accepts any value.
inline ValidationReport validate_rules(const Policy& policy, const AttributeVocabulary& vocab) {
    ValidationReport report;
    for (const auto& rule : policy.rules()) {
        for (const Condition* cond : {&rule.user_cond, &rule.object_cond, &rule.env_cond}) {
            for (const auto& clause : cond->clauses()) {
                const auto* entry = vocab.find(clause.attribute.name());
                if (!entry) {
                    report.violations.push_back(
                        {rule.index, ViolationKind::UnknownAttribute, clause.attribute.name(), clause.value});
                } else if (!entry->allowed_values.empty() && !entry->allowed_values.contains(clause.value)) {
                    report.violations.push_back(
                        {rule.index, ViolationKind::ValueNotAllowed, clause.attribute.name(), clause.value});
                }
            }
        }
    }
    return report;
}

} // namespace lmn
