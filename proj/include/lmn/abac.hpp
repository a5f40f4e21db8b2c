#pragma once

// ABAC domain model: attributes over users, objects and the environment,
// equality-conjunction conditions, rules, policies and request evaluation.
//
// Evaluation is first-match over the ordered rule list with a default Deny.

#include "lmn/text.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmn {

class InvalidModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class AttributeCategory { User, Object, Environment };

inline std::string_view to_string(AttributeCategory c) {
    switch (c) {
        case AttributeCategory::User:        return "user";
        case AttributeCategory::Object:      return "object";
        case AttributeCategory::Environment: return "env";
    }
    return "user";
}

inline std::ostream& operator<<(std::ostream& os, AttributeCategory c) { return os << to_string(c); }

enum class Decision { Allow, Deny };

inline std::string_view to_string(Decision d) { return d == Decision::Allow ? "Allow" : "Deny"; }

inline std::ostream& operator<<(std::ostream& os, Decision d) { return os << to_string(d); }

/// An attribute name within a category. Names compare case-insensitively.
class AttributeRef {
public:
    AttributeRef(AttributeCategory category, std::string_view name)
        : category_(category), name_(text::trim(name)) {
        if (name_.empty()) throw InvalidModel("attribute name must not be empty");
        if (name_.find('\n') != std::string::npos) throw InvalidModel("attribute name must not contain a newline");
    }

    AttributeCategory category() const { return category_; }
    const std::string& name() const { return name_; }

    friend bool operator==(const AttributeRef& a, const AttributeRef& b) {
        return a.category_ == b.category_ && text::iequals(a.name_, b.name_);
    }

    friend bool operator<(const AttributeRef& a, const AttributeRef& b) {
        if (a.category_ != b.category_) return a.category_ < b.category_;
        return text::icompare(a.name_, b.name_) < 0;
    }

private:
    AttributeCategory category_;
    std::string name_;
};

inline std::ostream& operator<<(std::ostream& os, const AttributeRef& a) {
    return os << a.category() << '.' << a.name();
}

struct Clause {
    AttributeRef attribute;
    std::string value;

    friend bool operator==(const Clause&, const Clause&) = default;
};

/// Conjunction of attribute = value clauses. Empty means "always true".
class Condition {
public:
    Condition() = default;

    explicit Condition(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {
        for (std::size_t i = 0; i < clauses_.size(); ++i) {
            if (text::trim(clauses_[i].value).empty())
                throw InvalidModel("clause value for '" + clauses_[i].attribute.name() + "' must not be empty");
            for (std::size_t j = 0; j < i; ++j)
                if (text::iequals(clauses_[i].attribute.name(), clauses_[j].attribute.name()))
                    throw InvalidModel("duplicate attribute '" + clauses_[i].attribute.name() + "' in condition");
        }
    }

    const std::vector<Clause>& clauses() const { return clauses_; }
    bool empty() const { return clauses_.empty(); }
    std::size_t size() const { return clauses_.size(); }

    friend bool operator==(const Condition&, const Condition&) = default;

private:
    std::vector<Clause> clauses_;
};

struct Rule {
    std::size_t index = 1;
    Decision decision = Decision::Allow;
    Condition user_cond;
    Condition object_cond;
    Condition env_cond;
    std::optional<std::string> operation;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// Ordered rule list; rule indices are the 1-based positions.
class Policy {
public:
    Policy() = default;

    explicit Policy(std::vector<Rule> rules) : rules_(std::move(rules)) {
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (rules_[i].index != i + 1)
                throw InvalidModel("rule at position " + std::to_string(i + 1) + " carries index " +
                                   std::to_string(rules_[i].index));
            if (rules_[i].operation && text::trim(*rules_[i].operation).empty())
                throw InvalidModel("rule operation must not be blank");
        }
    }

    /// Appends a rule, assigning the next index.
    void append(Rule rule) {
        rule.index = rules_.size() + 1;
        if (rule.operation && text::trim(*rule.operation).empty())
            throw InvalidModel("rule operation must not be blank");
        rules_.push_back(std::move(rule));
    }

    const std::vector<Rule>& rules() const { return rules_; }
    bool empty() const { return rules_.empty(); }
    std::size_t size() const { return rules_.size(); }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::vector<Rule> rules_;
};

struct AccessRequest {
    std::map<AttributeRef, std::string> assignments;
    std::optional<std::string> operation;

    AccessRequest& set(AttributeCategory c, std::string_view name, std::string value) {
        assignments.insert_or_assign(AttributeRef(c, name), std::move(value));
        return *this;
    }
};

struct AccessDecision {
    std::optional<std::size_t> matched_rule;
    Decision decision = Decision::Deny;

    friend bool operator==(const AccessDecision&, const AccessDecision&) = default;
};

struct VocabularyEntry {
    AttributeRef attribute;
    std::set<std::string> allowed_values;

    friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// Declared attributes and their allowed values, in declaration order.
/// At most one entry per attribute name (case-insensitive).
class AttributeVocabulary {
public:
    /// Adds the attribute or merges values into an existing entry with the same name.
    /// The category of the first declaration wins.
    void add(const AttributeRef& attribute, const std::set<std::string>& values = {}) {
        for (auto& e : entries_) {
            if (text::iequals(e.attribute.name(), attribute.name())) {
                e.allowed_values.insert(values.begin(), values.end());
                return;
            }
        }
        entries_.push_back({attribute, values});
    }

    const VocabularyEntry* find(std::string_view name) const {
        for (const auto& e : entries_)
            if (text::iequals(e.attribute.name(), name)) return &e;
        return nullptr;
    }

    const std::vector<VocabularyEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    friend bool operator==(const AttributeVocabulary&, const AttributeVocabulary&) = default;

private:
    std::vector<VocabularyEntry> entries_;
};

inline bool condition_matches(const Condition& cond, const AccessRequest& req) {
    for (const auto& clause : cond.clauses()) {
        auto it = req.assignments.find(clause.attribute);
        if (it == req.assignments.end() || it->second != clause.value) return false;
    }
    return true;
}

inline bool rule_matches(const Rule& rule, const AccessRequest& req) {
    if (rule.operation && req.operation && *rule.operation != *req.operation) return false;
    return condition_matches(rule.user_cond, req) && condition_matches(rule.object_cond, req) &&
           condition_matches(rule.env_cond, req);
}

inline AccessDecision evaluate_access(const Policy& policy, const AccessRequest& req) {
    for (const auto& rule : policy.rules())
        if (rule_matches(rule, req)) return {rule.index, rule.decision};
    return {std::nullopt, Decision::Deny};
}

/// Every (attribute, value) pair used by any rule; attributes in order of first
/// appearance (user, object, env within a rule), values sorted.
inline AttributeVocabulary vocabulary_from_rules(const Policy& policy) {
    AttributeVocabulary vocab;
    for (const auto& rule : policy.rules())
        for (const Condition* cond : {&rule.user_cond, &rule.object_cond, &rule.env_cond})
            for (const auto& clause : cond->clauses()) vocab.add(clause.attribute, {clause.value});
    return vocab;
}

} // namespace lmn
