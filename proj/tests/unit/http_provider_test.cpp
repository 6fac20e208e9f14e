#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/providers.hpp"

namespace stratevo {
namespace {

/// Local endpoint whose reply to the n-th request (0-based) comes from `script`.
class StubServer {
 public:
  using Script = std::function<void(int n, const httplib::Request&, httplib::Response&)>;

  explicit StubServer(Script script) : script_(std::move(script)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      script_(hits_++, req, res);
    };
    server_.Post("/v1/chat/completions", handler);
    server_.Post("/v1/embeddings", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig endpoint(int retry_budget) const {
    EndpointConfig ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/";
    ep.model = "stub-model";
    ep.api_key_env = "STRATEVO_TEST_KEY";
    ep.timeout_seconds = 5.0;
    ep.retry = {retry_budget, 5, 20};
    return ep;
  }
  int hits() const { return hits_; }

 private:
  Script script_;
  httplib::Server server_;
  std::thread thread_;
  std::atomic<int> hits_{0};
  int port_ = 0;
};

constexpr const char* kChatOk =
    R"({"choices":[{"message":{"role":"assistant","content":"hello"}}],)"
    R"("usage":{"prompt_tokens":12,"completion_tokens":3}})";

TEST(OpenAiChat, RetriesThrough429s) {
  StubServer stub([](int n, const httplib::Request& req, httplib::Response& res) {
    if (n < 2) {
      res.status = 429;
      res.set_content(R"({"error":"slow down"})", "application/json");
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body.at("model"), "stub-model");
    EXPECT_EQ(body.at("messages").size(), 2u);
    res.set_content(kChatOk, "application/json");
  });
  auto ledger = std::make_shared<UsageLedger>();
  OpenAiChat chat(stub.endpoint(3), PriceTable({{"stub-model", {1.0, 2.0}}}), ledger);
  ChatRequest r;
  r.system = "sys";
  r.user = "usr";
  const ChatExchange ex = chat.chat(r);
  EXPECT_EQ(ex.response.text, "hello");
  EXPECT_EQ(ex.response.retries, 2);
  EXPECT_EQ(ex.response.prompt_tokens, 12);
  EXPECT_DOUBLE_EQ(ex.cost_usd, 12e-6 + 6e-6);
  EXPECT_EQ(stub.hits(), 3);
  EXPECT_EQ(chat.network_calls(), 3u);
  // One successful exchange is accounted once.
  EXPECT_EQ(ledger->records().size(), 1u);
  EXPECT_DOUBLE_EQ(ledger->total_cost(), ex.cost_usd);
}

TEST(OpenAiChat, PersistentServerErrorExhaustsBudget) {
  StubServer stub([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  OpenAiChat chat(stub.endpoint(1), {}, nullptr);
  try {
    chat.chat(ChatRequest{});
    FAIL() << "expected ProviderExhausted";
  } catch (const ProviderExhausted& e) {
    EXPECT_EQ(e.last_status(), 500);
  }
  EXPECT_EQ(stub.hits(), 2);
}

TEST(OpenAiChat, ClientErrorIsNotRetried) {
  StubServer stub([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content(R"({"error":"bad"})", "application/json");
  });
  OpenAiChat chat(stub.endpoint(3), {}, nullptr);
  EXPECT_THROW(chat.chat(ChatRequest{}), ProviderError);
  EXPECT_EQ(stub.hits(), 1);
}

TEST(OpenAiChat, PartialUsageOnFailureIsRecorded) {
  StubServer stub([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content(R"({"usage":{"prompt_tokens":4,"completion_tokens":1}})", "application/json");
  });
  auto ledger = std::make_shared<UsageLedger>();
  OpenAiChat chat(stub.endpoint(0), PriceTable({{"stub-model", {1e6, 1e6}}}), ledger);
  EXPECT_THROW(chat.chat(ChatRequest{}), ProviderExhausted);
  ASSERT_EQ(ledger->records().size(), 1u);
  EXPECT_FALSE(ledger->records()[0].succeeded);
  EXPECT_DOUBLE_EQ(ledger->total_cost(), 5.0);
}

TEST(OpenAiChat, UnreachableEndpointReportsStatusZero) {
  EndpointConfig ep;
  ep.base_url = "http://127.0.0.1:1/v1";
  ep.model = "m";
  ep.timeout_seconds = 1.0;
  ep.retry = {1, 1, 1};
  OpenAiChat chat(ep, {}, nullptr);
  try {
    chat.chat(ChatRequest{});
    FAIL() << "expected ProviderExhausted";
  } catch (const ProviderExhausted& e) {
    EXPECT_EQ(e.last_status(), 0);
  }
}

TEST(OpenAiEmbedding, NormalizesAndChecksDimension) {
  StubServer stub([](int, const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(nlohmann::json::parse(req.body).at("input"), "some text");
    res.set_content(R"({"data":[{"embedding":[3.0,0.0,4.0]}],"usage":{"prompt_tokens":2}})", "application/json");
  });
  OpenAiEmbedding three(stub.endpoint(0), 3, {}, nullptr);
  const EmbeddingResult r = three.embed("some text");
  EXPECT_NEAR(r.vector[0], 0.6, 1e-12);
  EXPECT_NEAR(r.vector[2], 0.8, 1e-12);
  EXPECT_EQ(r.tokens, 2);
  OpenAiEmbedding four(stub.endpoint(0), 4, {}, nullptr);
  EXPECT_THROW(four.embed("some text"), ProviderError);
  EXPECT_THROW(four.embed(""), ProviderError);
}

}  // namespace
}  // namespace stratevo
