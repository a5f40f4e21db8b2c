#pragma once

// OpenAI-compatible chat-completions backend over cpp-httplib.
//
// POST {endpoint}/chat/completions
//   {"model": ..., "messages": [{"role": "user", "content": prompt}],
//    "temperature": ..., "max_tokens": ...}
// Authorization: Bearer <key>; reply text is choices[0].message.content.

#include "lmn/llm_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <string>
#include <string_view>
#include <thread>

namespace lmn {

struct EndpointUrl {
    std::string origin;     // scheme://host[:port]
    std::string base_path;  // "" or "/v1", never ends in '/'
};

inline EndpointUrl split_endpoint(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw LlmError(ErrorKind::Precondition, "endpoint URL must start with http:// or https://");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw LlmError(ErrorKind::Precondition, "unsupported endpoint scheme '" + std::string(scheme) + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    EndpointUrl out;
    out.origin = std::string(url.substr(0, path_start));
    if (path_start != std::string_view::npos) {
        out.base_path = std::string(url.substr(path_start));
        while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    }
    if (out.origin.size() <= scheme_end + 3) throw LlmError(ErrorKind::Precondition, "endpoint URL has no host");
    return out;
}

/// POSTs a JSON body with bearer auth, retrying transport failures, 429 and 5xx
/// with exponential backoff. Returns the parsed JSON body of the 2xx reply.
/// Attempts never exceed max_retries + 1. Error text never contains the key.
inline nlohmann::json post_json_with_retry(const CompletionConfig& config, std::string_view path,
                                           const nlohmann::json& body) {
    const auto endpoint = split_endpoint(config.endpoint_url);
    const auto full_path = endpoint.base_path + std::string(path);
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key.reveal());

    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config.request_timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config.request_timeout - seconds);

    ErrorKind last_kind = ErrorKind::Transport;
    std::string last_message;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config.retry_backoff_base * (1LL << (attempt - 1)));

        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(seconds.count(), micros.count());
        client.set_read_timeout(seconds.count(), micros.count());
        client.set_write_timeout(seconds.count(), micros.count());

        auto res = client.Post(full_path, headers, payload, "application/json");
        if (!res) {
            last_kind = ErrorKind::Transport;
            last_message = "request to " + endpoint.origin + " failed: " + httplib::to_string(res.error());
            continue;
        }
        const int status = res->status;
        if (status == 401 || status == 403)
            throw LlmError(ErrorKind::Auth, "endpoint rejected the credentials (HTTP " + std::to_string(status) + ")");
        if (status == 429) {
            last_kind = ErrorKind::RateLimited;
            last_message = "HTTP 429 after " + std::to_string(attempt + 1) + " attempt(s)";
            continue;
        }
        if (status >= 500) {
            last_kind = ErrorKind::ServerError;
            last_message = "HTTP " + std::to_string(status) + " after " + std::to_string(attempt + 1) + " attempt(s)";
            continue;
        }
        if (status < 200 || status >= 300)
            throw LlmError(ErrorKind::BadRequest,
                           redact("HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200), config.api_key));
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
            throw LlmError(ErrorKind::MalformedResponse, "response body is not JSON");
        }
    }
    throw LlmError(last_kind, redact(last_message, config.api_key));
}

class OpenAiBackend final : public CompletionBackend {
public:
    std::string id() const override { return "openai"; }

    bool ready(const CompletionConfig& config) const override { return !config.api_key.empty(); }

protected:
    CompletionResult do_complete(std::string_view prompt, const CompletionConfig& config) const override {
        nlohmann::json body = {
            {"model", config.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
            {"temperature", config.temperature},
            {"max_tokens", config.max_output_tokens},
        };

        const auto start = std::chrono::steady_clock::now();
        const auto reply = post_json_with_retry(config, "/chat/completions", body);

        CompletionResult result;
        result.backend_id = id();
        try {
            const auto& content = reply.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw LlmError(ErrorKind::MalformedResponse, "message content is not a string");
            result.text = content.get<std::string>();
            if (auto it = reply.find("usage"); it != reply.end() && it->is_object()) {
                TokenUsage usage;
                usage.prompt_tokens = it->value("prompt_tokens", 0L);
                usage.completion_tokens = it->value("completion_tokens", 0L);
                result.token_usage = usage;
            }
        } catch (const nlohmann::json::exception&) {
            throw LlmError(ErrorKind::MalformedResponse, "reply lacks choices[0].message.content");
        }
        result.latency = std::chrono::steady_clock::now() - start;
        return result;
    }
};

} // namespace lmn
