#pragma once

// Per-attribute extraction counts: for each tracked key, the number of samples
// whose generated value set for that key equals the gold value set exactly
// (case-insensitive). The key `Label` refers to the rule decisions.

#include "lmn/abac.hpp"
#include "lmn/mesp.hpp"
#include "lmn/text.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmn::eval {

using ValueSet = std::set<std::string>;

/// Expected values per attribute key for one sample. Keys compare case-insensitively.
using GoldSample = std::map<std::string, ValueSet, text::ILess>;

inline const std::vector<std::string>& default_tracked_keys() {
    static const std::vector<std::string> keys{"Role", "Department", "System", "Time", "Day", "Label"};
    return keys;
}

struct ExtractionReport {
    std::vector<std::pair<std::string, std::size_t>> per_attribute_counts;  // in tracked-key order
    std::size_t sample_count = 0;

    std::size_t count(std::string_view key) const {
        for (const auto& [k, n] : per_attribute_counts)
            if (text::iequals(k, key)) return n;
        throw std::out_of_range("key '" + std::string(key) + "' is not tracked");
    }
};

/// Lower-cased values `policy` assigns to `key` across all rules.
inline ValueSet extracted_values(const Policy& policy, std::string_view key) {
    ValueSet out;
    for (const auto& rule : policy.rules()) {
        if (text::iequals(key, "Label")) {
            out.insert(text::to_lower(to_string(rule.decision)));
            continue;
        }
        for (const Condition* cond : {&rule.user_cond, &rule.object_cond, &rule.env_cond})
            for (const auto& clause : cond->clauses())
                if (text::iequals(clause.attribute.name(), key)) out.insert(text::to_lower(clause.value));
    }
    return out;
}

inline ExtractionReport score_attribute_extraction(const std::vector<Policy>& generated,
                                                   const std::vector<GoldSample>& gold,
                                                   const std::vector<std::string>& tracked_keys = default_tracked_keys()) {
    if (generated.size() != gold.size())
        throw std::invalid_argument("generated and gold sample counts differ: " + std::to_string(generated.size()) +
                                    " vs " + std::to_string(gold.size()));
    if (generated.empty()) throw std::invalid_argument("at least one sample is required");

    ExtractionReport report;
    report.sample_count = generated.size();
    for (const auto& key : tracked_keys) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < generated.size(); ++i) {
            ValueSet expected;
            if (auto it = gold[i].find(key); it != gold[i].end())
                for (const auto& v : it->second) expected.insert(text::to_lower(v));
            if (extracted_values(generated[i], key) == expected) ++correct;
        }
        report.per_attribute_counts.emplace_back(key, correct);
    }
    return report;
}

/// Gold file: one `Key: v1, v2` line per attribute, `#` comments.
inline GoldSample parse_gold(std::string_view contents) {
    GoldSample out;
    const auto parsed = parse_attributes_file(contents);
    for (const auto& entry : parsed.vocabulary.entries())
        out[entry.attribute.name()].insert(entry.allowed_values.begin(), entry.allowed_values.end());
    return out;
}

/// Gold map derived from a policy, so that scoring a policy against itself is perfect.
inline GoldSample gold_from_policy(const Policy& policy, const std::vector<std::string>& keys = default_tracked_keys()) {
    GoldSample out;
    for (const auto& key : keys) {
        auto values = extracted_values(policy, key);
        if (!values.empty()) out[key] = std::move(values);
    }
    return out;
}

} // namespace lmn::eval
