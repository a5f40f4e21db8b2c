#pragma once

// BERTScore over externally supplied token embeddings: greedy maximum cosine
// matching, no idf weighting, no baseline rescaling.
//
// Embeddings come from an EmbeddingProvider. Two are provided: a lexicon file
// (`token<TAB>v1 v2 ... vd` per line) and an OpenAI-compatible /embeddings endpoint.

#include "lmn/eval/metrics.hpp"
#include "lmn/llm_client.hpp"
#include "lmn/openai_backend.hpp"
#include "lmn/text.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lmn::eval {

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Tokens paired with one embedding each; all vectors share one dimension and none is zero.
class EmbeddedSequence {
public:
    EmbeddedSequence() = default;

    EmbeddedSequence(TokenSequence tokens, std::vector<Vector> vectors)
        : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
        if (tokens_.size() != vectors_.size())
            throw EmbeddingError("token count " + std::to_string(tokens_.size()) + " != vector count " +
                                 std::to_string(vectors_.size()));
        for (std::size_t i = 0; i < vectors_.size(); ++i) {
            if (vectors_[i].empty()) throw EmbeddingError("empty embedding vector");
            if (vectors_[i].size() != vectors_.front().size()) throw EmbeddingError("embedding dimensions differ");
            double norm2 = 0.0;
            for (double x : vectors_[i]) {
                if (!std::isfinite(x)) throw EmbeddingError("non-finite embedding component");
                norm2 += x * x;
            }
            if (norm2 == 0.0) throw EmbeddingError("zero embedding vector for token '" + tokens_[i] + "'");
        }
    }

    const TokenSequence& tokens() const { return tokens_; }
    const std::vector<Vector>& vectors() const { return vectors_; }
    std::size_t size() const { return vectors_.size(); }
    bool empty() const { return vectors_.empty(); }
    std::size_t dimension() const { return vectors_.empty() ? 0 : vectors_.front().size(); }

private:
    TokenSequence tokens_;
    std::vector<Vector> vectors_;
};

inline double cosine(const Vector& a, const Vector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline ScoreTriple bert_score(const EmbeddedSequence& candidate, const EmbeddedSequence& reference) {
    if (candidate.empty() || reference.empty()) throw EmbeddingError("bert_score needs non-empty sequences");
    if (candidate.dimension() != reference.dimension())
        throw EmbeddingError("embedding dimension mismatch: " + std::to_string(candidate.dimension()) + " vs " +
                             std::to_string(reference.dimension()));

    const auto m = candidate.size();
    const auto n = reference.size();
    std::vector<double> best_for_cand(m, -2.0), best_for_ref(n, -2.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double s = cosine(candidate.vectors()[i], reference.vectors()[j]);
            best_for_cand[i] = std::max(best_for_cand[i], s);
            best_for_ref[j] = std::max(best_for_ref[j], s);
        }
    }
    double p = 0.0, r = 0.0;
    for (double s : best_for_cand) p += s;
    for (double s : best_for_ref) r += s;
    p /= static_cast<double>(m);
    r /= static_cast<double>(n);
    return ScoreTriple::from(p, r);
}

struct EmbedResult {
    EmbeddedSequence sequence;
    std::vector<std::string> missing;  // tokens the provider had no vector for
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbedResult embed(const TokenSequence& tokens) const = 0;
};

class LexiconEmbeddings final : public EmbeddingProvider {
public:
    static LexiconEmbeddings parse(std::string_view contents) {
        LexiconEmbeddings lex;
        const auto lines = text::split_lines(contents);
        for (std::size_t ln = 0; ln < lines.size(); ++ln) {
            const auto line = text::trim(lines[ln]);
            if (line.empty() || line.front() == '#') continue;
            std::size_t i = 0;
            while (i < line.size() && !text::is_space(line[i])) ++i;
            const auto token = text::to_lower(line.substr(0, i));
            Vector v;
            std::string rest(line.substr(i));
            const char* p = rest.c_str();
            for (;;) {
                char* end = nullptr;
                const double x = std::strtod(p, &end);
                if (end == p) break;
                v.push_back(x);
                p = end;
            }
            if (!text::trim(std::string_view(p)).empty() || v.empty())
                throw EmbeddingError("lexicon line " + std::to_string(ln + 1) + " is not 'token v1 v2 ...'");
            if (lex.dimension_ && v.size() != lex.dimension_)
                throw EmbeddingError("lexicon line " + std::to_string(ln + 1) + " has dimension " +
                                     std::to_string(v.size()) + ", expected " + std::to_string(lex.dimension_));
            lex.dimension_ = v.size();
            lex.vectors_.insert_or_assign(token, std::move(v));
        }
        return lex;
    }

    EmbedResult embed(const TokenSequence& tokens) const override {
        TokenSequence kept;
        std::vector<Vector> vectors;
        EmbedResult out;
        for (const auto& t : tokens) {
            if (auto it = vectors_.find(t); it != vectors_.end()) {
                kept.push_back(t);
                vectors.push_back(it->second);
            } else {
                out.missing.push_back(t);
            }
        }
        out.sequence = EmbeddedSequence(std::move(kept), std::move(vectors));
        return out;
    }

    std::size_t size() const { return vectors_.size(); }
    std::size_t dimension() const { return dimension_; }

private:
    std::unordered_map<std::string, Vector> vectors_;
    std::size_t dimension_ = 0;
};

/// Per-token embeddings from POST {endpoint}/embeddings ({"model", "input": [tokens]}).
class HttpEmbeddings final : public EmbeddingProvider {
public:
    HttpEmbeddings(CompletionConfig transport, std::string model)
        : transport_(std::move(transport)), model_(std::move(model)) {}

    EmbedResult embed(const TokenSequence& tokens) const override {
        EmbedResult out;
        if (tokens.empty()) return out;
        nlohmann::json body = {{"model", model_}, {"input", tokens}};
        const auto reply = post_json_with_retry(transport_, "/embeddings", body);
        std::vector<Vector> vectors(tokens.size());
        try {
            for (const auto& item : reply.at("data")) {
                const auto idx = item.value("index", std::size_t{0});
                if (idx >= vectors.size()) throw EmbeddingError("embedding index out of range");
                vectors[idx] = item.at("embedding").get<Vector>();
            }
        } catch (const nlohmann::json::exception&) {
            throw LlmError(ErrorKind::MalformedResponse, "embedding reply lacks data[].embedding");
        }
        out.sequence = EmbeddedSequence(tokens, std::move(vectors));
        return out;
    }

private:
    CompletionConfig transport_;
    std::string model_;
};

} // namespace lmn::eval
