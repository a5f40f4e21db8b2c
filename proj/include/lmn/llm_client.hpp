#pragma once

// Chat-completion backends. `CompletionBackend::complete` is the single entry
// point; concrete backends live in mock_backend.hpp and openai_backend.hpp.

#include "lmn/text.hpp"

#include <chrono>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lmn {

/// Holds an API key. Streams as a mask; the raw value is only reachable through reveal().
class ApiKey {
public:
    ApiKey() = default;
    explicit ApiKey(std::string value) : value_(std::move(value)) {}

    bool empty() const { return value_.empty(); }
    const std::string& reveal() const { return value_; }

    friend std::ostream& operator<<(std::ostream& os, const ApiKey& k) { return os << (k.empty() ? "<unset>" : "***"); }

private:
    std::string value_;
};

/// Replaces every occurrence of the key in `s` with a mask.
inline std::string redact(std::string s, const ApiKey& key) {
    if (key.reveal().size() >= 4) text::replace_all(s, key.reveal(), "***");
    return s;
}

inline constexpr std::string_view kDefaultEndpoint = "https://api.openai.com/v1";

struct CompletionConfig {
    std::string model_name = "gpt-3.5-turbo";
    std::string endpoint_url = std::string(kDefaultEndpoint);
    ApiKey api_key;
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::chrono::milliseconds request_timeout{60'000};
    int max_retries = 2;
    // Delay before retry k (0-based) is retry_backoff_base * 2^k.
    std::chrono::milliseconds retry_backoff_base{1'000};

    /// Fills the key from LMN_API_KEY when unset and the endpoint from LMN_ENDPOINT when present.
    CompletionConfig& apply_environment() {
        if (api_key.empty())
            if (const char* k = std::getenv("LMN_API_KEY"); k && *k) api_key = ApiKey(k);
        if (const char* e = std::getenv("LMN_ENDPOINT"); e && *e) endpoint_url = e;
        return *this;
    }

    void validate() const;
};

enum class ErrorKind { Precondition, Auth, RateLimited, Transport, ServerError, BadRequest, MalformedResponse };

inline std::string_view to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Precondition:      return "PreconditionError";
        case ErrorKind::Auth:              return "AuthError";
        case ErrorKind::RateLimited:       return "RateLimited";
        case ErrorKind::Transport:         return "TransportError";
        case ErrorKind::ServerError:       return "ServerError";
        case ErrorKind::BadRequest:        return "BadRequest";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
    }
    return "Error";
}

class LlmError : public std::runtime_error {
public:
    LlmError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline void CompletionConfig::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw LlmError(ErrorKind::Precondition, "temperature must be in [0, 2]");
    if (max_output_tokens <= 0) throw LlmError(ErrorKind::Precondition, "max_output_tokens must be positive");
    if (max_retries < 0) throw LlmError(ErrorKind::Precondition, "max_retries must not be negative");
    if (request_timeout.count() <= 0) throw LlmError(ErrorKind::Precondition, "request_timeout must be positive");
}

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct CompletionResult {
    std::string text;
    std::chrono::nanoseconds latency{0};
    std::string backend_id;
    std::optional<TokenUsage> token_usage;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    CompletionResult complete(std::string_view prompt, const CompletionConfig& config) const {
        if (prompt.empty()) throw LlmError(ErrorKind::Precondition, "prompt must not be empty");
        config.validate();
        return do_complete(prompt, config);
    }

    virtual std::string id() const = 0;

    /// False when the backend cannot serve requests as configured (e.g. missing key).
    virtual bool ready(const CompletionConfig&) const { return true; }

protected:
    virtual CompletionResult do_complete(std::string_view prompt, const CompletionConfig& config) const = 0;
};

} // namespace lmn
