#include "lmn/mock_backend.hpp"
#include "lmn/openai_backend.hpp"
#include "support/stub_server.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <random>
#include <set>
#include <sstream>

using namespace lmn;
using lmn::testing::StubReply;
using lmn::testing::StubServer;

namespace {

const std::string kSecret = "sk-test-SECRET-0123456789";

CompletionConfig stub_config(const StubServer& s) {
    CompletionConfig c;
    c.endpoint_url = s.url();
    c.api_key = ApiKey(kSecret);
    c.retry_backoff_base = std::chrono::milliseconds(1);
    c.request_timeout = std::chrono::milliseconds(5000);
    return c;
}

LlmError capture_error(const CompletionBackend& b, const CompletionConfig& c) {
    try {
        b.complete("prompt", c);
    } catch (const LlmError& e) {
        return e;
    }
    ADD_FAILURE() << "expected LlmError";
    return LlmError(ErrorKind::Precondition, "none");
}

} // namespace

TEST(ApiKey, NeverPrintsValue) {
    std::ostringstream os;
    os << ApiKey(kSecret);
    EXPECT_EQ(os.str(), "***");
    EXPECT_EQ(redact("x " + kSecret + " y", ApiKey(kSecret)), "x *** y");
}

TEST(CompletionConfig, Validation) {
    CompletionConfig c;
    EXPECT_NO_THROW(c.validate());
    c.temperature = 3.0;
    EXPECT_THROW(c.validate(), LlmError);
    c = CompletionConfig{};
    c.max_retries = -1;
    EXPECT_THROW(c.validate(), LlmError);
    c = CompletionConfig{};
    c.max_output_tokens = 0;
    EXPECT_THROW(c.validate(), LlmError);
}

TEST(Endpoint, SplitsOriginAndPath) {
    auto e = split_endpoint("https://api.openai.com/v1/");
    EXPECT_EQ(e.origin, "https://api.openai.com");
    EXPECT_EQ(e.base_path, "/v1");
    e = split_endpoint("http://localhost:8000");
    EXPECT_EQ(e.origin, "http://localhost:8000");
    EXPECT_EQ(e.base_path, "");
}

TEST(MockBackend, TwoInputTrace) {
    const auto prompt = render_prompt(PromptId(1, Mode::LMN2), "Any User may log in.", "Role: User");
    EXPECT_EQ(mock_generate(prompt), "1: (Label: Allow), (Role: User)\n");
}

TEST(MockBackend, EmptyPolicyGivesEmptyOutput) {
    EXPECT_EQ(mock_generate(render_prompt(PromptId(1, Mode::LMN1), "")), "");
    EXPECT_EQ(mock_generate(render_prompt(PromptId(2, Mode::LMN2), "  \n", "Role: User")), "");
}

TEST(MockBackend, NegationGivesDeny) {
    const auto prompt =
        render_prompt(PromptId(1, Mode::LMN2), "A Student cannot modify the Gradebook.", "Role: Student\nSystem: Gradebook");
    EXPECT_EQ(mock_generate(prompt), "1: (Label: Deny), (Role: Student), (System: Gradebook)\n");
}

TEST(MockBackend, OneInputKeywordHeuristic) {
    const auto prompt = render_prompt(PromptId(1, Mode::LMN1),
                                      "A Professor in the Physics Department can use the Gradebook System on Day: "
                                      "Monday.\nThe Role is Staff.");
    EXPECT_EQ(mock_generate(prompt),
              "1: (Label: Allow), (Department: Physics), (System: Gradebook), (Day: Monday)\n"
              "2: (Label: Allow), (Role: Staff)\n");
}

TEST(MockBackend, DeterministicAndParseable) {
    std::mt19937 rng(1);
    const std::vector<std::string> words{"Professor", "Student", "Role", "System", "Portal", "cannot", "Day",
                                         "Monday",    "the",     "is",   ":",      ".",      "Time",   "9AM"};
    for (int i = 0; i < 100; ++i) {
        std::string nlacp;
        for (int w = 0; w < 25; ++w) nlacp += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)] + " ";
        for (const auto& tmpl : list_prompts()) {
            const auto prompt = tmpl.id.mode() == Mode::LMN2
                                    ? render_prompt(tmpl.id, nlacp, "Role: Professor, Student\nSystem: Portal\nDay")
                                    : render_prompt(tmpl.id, nlacp);
            std::set<std::string> outputs;
            for (int k = 0; k < 3; ++k) outputs.insert(mock_generate(prompt));
            ASSERT_EQ(outputs.size(), 1u);
            ASSERT_EQ(parse_mesp(*outputs.begin()).error_count(), 0u) << *outputs.begin();
        }
    }
}

TEST(MockBackend, CompleteReportsBackendAndLatency) {
    MockBackend b;
    const auto r = b.complete(render_prompt(PromptId(1, Mode::LMN2), "A User.", "Role: User"), CompletionConfig{});
    EXPECT_EQ(r.backend_id, "mock");
    EXPECT_GE(r.latency.count(), 0);
    EXPECT_THROW(b.complete("", CompletionConfig{}), LlmError);
}

TEST(OpenAiBackend, SuccessfulCompletion) {
    StubServer stub({{200, StubServer::chat_reply("1: (Label: Allow), (Role: User)")}});
    OpenAiBackend b;
    const auto r = b.complete("hello", stub_config(stub));
    EXPECT_EQ(r.text, "1: (Label: Allow), (Role: User)");
    EXPECT_EQ(r.backend_id, "openai");
    ASSERT_TRUE(r.token_usage);
    EXPECT_EQ(r.token_usage->prompt_tokens, 11);
    EXPECT_EQ(stub.attempts(), 1u);
    EXPECT_EQ(stub.last_path(), "/v1/chat/completions");
    EXPECT_EQ(stub.last_auth(), "Bearer " + kSecret);
    const auto body = nlohmann::json::parse(stub.last_body());
    EXPECT_EQ(body["model"], "gpt-3.5-turbo");
    ASSERT_EQ(body["messages"].size(), 1u);
    EXPECT_EQ(body["messages"][0]["role"], "user");
    EXPECT_EQ(body["messages"][0]["content"], "hello");
    EXPECT_EQ(body["temperature"], 0.0);
    EXPECT_EQ(body["max_tokens"], 2048);
}

TEST(OpenAiBackend, RetriesThenSucceeds) {
    StubServer stub({{503, "{}"}, {429, "{}"}, {200, StubServer::chat_reply("ok")}});
    const auto r = OpenAiBackend{}.complete("p", stub_config(stub));
    EXPECT_EQ(r.text, "ok");
    EXPECT_EQ(stub.attempts(), 3u);
}

TEST(OpenAiBackend, AttemptsNeverExceedRetriesPlusOne) {
    for (int retries : {0, 1, 3}) {
        StubServer stub({{500, "{}"}});
        auto c = stub_config(stub);
        c.max_retries = retries;
        const auto e = capture_error(OpenAiBackend{}, c);
        EXPECT_EQ(e.kind(), ErrorKind::ServerError);
        EXPECT_EQ(stub.attempts(), static_cast<std::size_t>(retries + 1));
    }
}

TEST(OpenAiBackend, RateLimitExhaustion) {
    StubServer stub({{429, "{}"}});
    const auto e = capture_error(OpenAiBackend{}, stub_config(stub));
    EXPECT_EQ(e.kind(), ErrorKind::RateLimited);
    EXPECT_EQ(stub.attempts(), 3u);
}

TEST(OpenAiBackend, AuthFailureIsNotRetriedAndHidesKey) {
    StubServer stub({{401, R"({"error":"bad key )" + kSecret + R"("})"}});
    const auto e = capture_error(OpenAiBackend{}, stub_config(stub));
    EXPECT_EQ(e.kind(), ErrorKind::Auth);
    EXPECT_EQ(stub.attempts(), 1u);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
}

TEST(OpenAiBackend, BadRequestBodyIsRedacted) {
    StubServer stub({{400, R"({"error":"echo )" + kSecret + R"("})"}});
    const auto e = capture_error(OpenAiBackend{}, stub_config(stub));
    EXPECT_EQ(e.kind(), ErrorKind::BadRequest);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
}

TEST(OpenAiBackend, MalformedReplies) {
    for (const std::string body : {"not json", R"({"choices":[]})", R"({"choices":[{"message":{"content":5}}]})"}) {
        StubServer stub({{200, body}});
        const auto e = capture_error(OpenAiBackend{}, stub_config(stub));
        EXPECT_EQ(e.kind(), ErrorKind::MalformedResponse) << body;
    }
}

TEST(OpenAiBackend, TransportFailureAfterRetries) {
    CompletionConfig c;
    c.endpoint_url = "http://127.0.0.1:1/v1";
    c.api_key = ApiKey(kSecret);
    c.retry_backoff_base = std::chrono::milliseconds(1);
    c.request_timeout = std::chrono::milliseconds(500);
    const auto e = capture_error(OpenAiBackend{}, c);
    EXPECT_EQ(e.kind(), ErrorKind::Transport);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
}

TEST(OpenAiBackend, ReadyRequiresKey) {
    CompletionConfig c;
    EXPECT_FALSE(OpenAiBackend{}.ready(c));
    c.api_key = ApiKey(kSecret);
    EXPECT_TRUE(OpenAiBackend{}.ready(c));
}
