#pragma once

// REST service over cpp-httplib.
//
//   POST /api/convert   multipart: mode, prompt?, nlacp (file), attributes (file)?
//                       -> application/zip "lmn_output.zip", X-LMN-Diagnostics: <n>
//   GET  /api/prompts   -> [{number, mode, preview}]
//   GET  /api/health    -> {status, backend, version}
//   GET  /              -> static web assets, when a directory is configured
//
// Errors are JSON {"error": <class>, "message": <text>}: 400 malformed or
// mismatched input, 413 oversize, 422 blank policy text, 502 backend failure.

#include "lmn/llm_client.hpp"
#include "lmn/mock_backend.hpp"
#include "lmn/openai_backend.hpp"
#include "lmn/pipeline.hpp"
#include "lmn/prompts.hpp"
#include "lmn/text.hpp"
#include "lmn/version.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lmn {

enum class BackendKind { Mock, OpenAi };

inline std::string_view to_string(BackendKind k) { return k == BackendKind::Mock ? "mock" : "openai"; }

inline BackendKind parse_backend_kind(std::string_view s) {
    if (s == "mock") return BackendKind::Mock;
    if (s == "openai") return BackendKind::OpenAi;
    throw std::invalid_argument("backend must be mock or openai, got '" + std::string(s) + "'");
}

inline std::shared_ptr<const CompletionBackend> make_backend(BackendKind kind) {
    if (kind == BackendKind::Mock) return std::make_shared<MockBackend>();
    return std::make_shared<OpenAiBackend>();
}

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    BackendKind backend = BackendKind::Mock;
    CompletionConfig completion;
    std::size_t max_upload_bytes = 1u << 20;
    std::size_t request_concurrency_limit = 8;
    std::optional<std::filesystem::path> static_dir;

    /// Reads LMN_BIND (host:port), LMN_BACKEND, LMN_API_KEY and LMN_ENDPOINT.
    ServiceConfig& apply_environment() {
        if (const char* bind = std::getenv("LMN_BIND"); bind && *bind) set_bind(bind);
        if (const char* b = std::getenv("LMN_BACKEND"); b && *b) backend = parse_backend_kind(b);
        completion.apply_environment();
        return *this;
    }

    void set_bind(std::string_view bind) {
        const auto colon = bind.rfind(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("bind address must be host:port");
        int p = 0;
        const auto port_text = bind.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), p);
        if (ec != std::errc() || ptr != port_text.data() + port_text.size() || p < 0 || p > 65535)
            throw std::invalid_argument("invalid port in bind address '" + std::string(bind) + "'");
        host = std::string(bind.substr(0, colon));
        port = p;
    }

    void validate() const {
        if (max_upload_bytes == 0) throw std::invalid_argument("max_upload_bytes must be positive");
        if (request_concurrency_limit == 0) throw std::invalid_argument("request_concurrency_limit must be positive");
    }
};

class Service {
public:
    Service(ServiceConfig config, std::shared_ptr<const CompletionBackend> backend)
        : config_(std::move(config)), backend_(std::move(backend)) {
        config_.validate();
        const auto workers = config_.request_concurrency_limit;
        server_.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
        // Two files plus multipart framing; per-file limits are checked after parsing.
        server_.set_payload_max_length(2 * config_.max_upload_bytes + 64 * 1024);
        routes();
    }

    explicit Service(ServiceConfig config) : Service(config, make_backend(config.backend)) {}

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Blocks serving on the configured host and port.
    bool listen() { return server_.listen(config_.host, config_.port); }

    /// Binds an ephemeral port and returns it; call listen_after_bind() to serve.
    int bind_any_port() { return server_.bind_to_any_port(config_.host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }

    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }
    bool is_running() const { return server_.is_running(); }

    nlohmann::json health() const {
        const bool ready = backend_->ready(config_.completion);
        return {{"status", ready ? "ok" : "degraded"}, {"backend", backend_->id()}, {"version", std::string(kVersion)}};
    }

private:
    static void json_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", std::string(kind)}, {"message", message}}.dump(), "application/json");
    }

    void routes() {
        server_.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(health().dump(), "application/json");
        });

        server_.Get("/api/prompts", [](const httplib::Request&, httplib::Response& res) {
            auto list = nlohmann::json::array();
            for (const auto& p : list_prompts()) {
                list.push_back({{"number", p.id.number()},
                                {"mode", std::string(to_string(p.id.mode()))},
                                {"preview", std::string(p.text.substr(0, 80))}});
            }
            res.set_content(list.dump(), "application/json");
        });

        server_.Post("/api/convert", [this](const httplib::Request& req, httplib::Response& res) { convert(req, res); });

        if (config_.static_dir && std::filesystem::is_directory(*config_.static_dir))
            server_.set_mount_point("/", config_.static_dir->string());

        server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 413)
                json_error(res, 413, "PayloadTooLarge", "upload exceeds the size limit");
            else if (res.status == 404)
                json_error(res, 404, "NotFound", "no such route");
        });

        server_.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                message = redact(e.what(), config_.completion.api_key);
            } catch (...) {
            }
            json_error(res, 500, "InternalError", message);
        });
    }

    void convert(const httplib::Request& req, httplib::Response& res) const {
        if (!req.is_multipart_form_data()) return json_error(res, 400, "BadRequest", "expected multipart/form-data");

        auto field = [&](const char* name) -> std::optional<std::string> {
            if (!req.has_file(name)) return std::nullopt;
            return req.get_file_value(name).content;
        };

        const auto mode_text = field("mode");
        if (!mode_text) return json_error(res, 400, "BadRequest", "missing 'mode' field");
        Mode mode;
        try {
            mode = parse_mode(text::trim(*mode_text));
        } catch (const std::invalid_argument& e) {
            return json_error(res, 400, "BadRequest", e.what());
        }

        int prompt_number = kDefaultPrompt;
        if (auto p = field("prompt"); p && !text::trim(*p).empty()) {
            const auto t = text::trim(*p);
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), prompt_number);
            if (ec != std::errc() || ptr != t.data() + t.size() || prompt_number < 1 || prompt_number > kPromptCount)
                return json_error(res, 400, "BadRequest", "prompt must be a number in 1..6");
        }

        auto nlacp = field("nlacp");
        auto attributes = field("attributes");
        if (!nlacp) return json_error(res, 400, "BadRequest", "missing 'nlacp' file");
        if (mode == Mode::LMN2 && !attributes)
            return json_error(res, 400, "BadRequest", "lmn2 requires an 'attributes' file");
        if (mode == Mode::LMN1 && attributes)
            return json_error(res, 400, "BadRequest", "lmn1 takes no 'attributes' file");
        if (nlacp->size() > config_.max_upload_bytes || (attributes && attributes->size() > config_.max_upload_bytes))
            return json_error(res, 413, "PayloadTooLarge",
                              "each file must be at most " + std::to_string(config_.max_upload_bytes) + " bytes");
        if (!text::is_valid_utf8(*nlacp) || (attributes && !text::is_valid_utf8(*attributes)))
            return json_error(res, 400, "BadRequest", "uploaded files must be UTF-8");

        ConversionRequest conv;
        conv.mode = mode;
        conv.nlacp_text = std::move(*nlacp);
        conv.attributes_text = std::move(attributes);
        conv.prompt_number = prompt_number;
        conv.completion_config = config_.completion;

        try {
            const auto out = run_conversion(conv, *backend_);
            res.set_header("Content-Disposition", "attachment; filename=\"lmn_output.zip\"");
            res.set_header("X-LMN-Diagnostics", std::to_string(out.diagnostics.size()));
            res.set_content(package_zip(out), "application/zip");
        } catch (const EmptyPolicyError& e) {
            json_error(res, 422, "EmptyPolicyError", e.what());
        } catch (const ConversionError& e) {
            json_error(res, 400, "BadRequest", e.what());
        } catch (const LlmError& e) {
            json_error(res, 502, to_string(e.kind()), redact(e.what(), config_.completion.api_key));
        }
    }

    ServiceConfig config_;
    std::shared_ptr<const CompletionBackend> backend_;
    httplib::Server server_;
};

} // namespace lmn
