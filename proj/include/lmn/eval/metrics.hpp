#pragma once

// Tokenizer and ROUGE-N / ROUGE-L scores.
//
// Tokenizer: lowercase, split on whitespace, strip leading/trailing ASCII
// punctuation from each token, drop empties. ROUGE F is the balanced F1.

#include "lmn/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmn::eval {

using TokenSequence = std::vector<std::string>;

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static ScoreTriple from(double p, double r) { return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0}; }
};

inline TokenSequence tokenize(std::string_view input) {
    TokenSequence out;
    std::size_t i = 0;
    while (i < input.size()) {
        while (i < input.size() && text::is_space(input[i])) ++i;
        std::size_t j = i;
        while (j < input.size() && !text::is_space(input[j])) ++j;
        auto word = input.substr(i, j - i);
        while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) word.remove_prefix(1);
        while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.remove_suffix(1);
        if (!word.empty()) out.push_back(text::to_lower(word));
        i = j;
    }
    return out;
}

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const TokenSequence& seq, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (seq.size() < n) return counts;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[{seq.begin() + i, seq.begin() + i + n}];
    return counts;
}

} // namespace detail

inline ScoreTriple rouge_n(const TokenSequence& candidate, const TokenSequence& reference, std::size_t n) {
    if (n == 0) throw std::invalid_argument("rouge_n requires n >= 1");
    const auto cand = detail::ngram_counts(candidate, n);
    const auto ref = detail::ngram_counts(reference, n);
    const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    const std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;

    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand)
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);

    const double p = cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
    const double r = ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
    return ScoreTriple::from(p, r);
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline ScoreTriple rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) return {};
    const auto l = static_cast<double>(lcs_length(candidate, reference));
    return ScoreTriple::from(l / static_cast<double>(candidate.size()), l / static_cast<double>(reference.size()));
}

} // namespace lmn::eval
