#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/providers.hpp"

namespace stratevo {

namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

bool retryable(int status) { return status == 429 || status >= 500; }

struct Reply {
  json body;
  int retries = 0;
  double latency_seconds = 0.0;
};

/// POSTs `payload` with retries. Partial usage found in failed responses is
/// passed to `on_failed_usage` before retrying.
template <typename OnUsage>
Reply post_with_retries(const EndpointConfig& ep, const std::string& path, const json& payload,
                        std::atomic<std::uint64_t>& network_calls, OnUsage on_failed_usage) {
  const SplitUrl url = split_url(ep.base_url);
  httplib::Client client(url.origin);
  const auto secs = static_cast<time_t>(ep.timeout_seconds);
  const auto usecs = static_cast<time_t>((ep.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!ep.api_key_env.empty()) {
    if (const char* key = std::getenv(ep.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string body = payload.dump();
  int backoff = ep.retry.backoff_initial_ms;
  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= ep.retry.retry_budget; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff = std::min(backoff * 2, ep.retry.backoff_max_ms);
    }
    const auto start = std::chrono::steady_clock::now();
    ++network_calls;
    auto res = client.Post(url.prefix + path, headers, body, "application/json");
    const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status >= 200 && res->status < 300) {
      Reply r;
      try {
        r.body = json::parse(res->body);
      } catch (const json::exception& ex) {
        throw ProviderError(std::string("endpoint returned invalid JSON: ") + ex.what());
      }
      r.retries = attempt;
      r.latency_seconds = latency;
      return r;
    }
    last_error = res->body.substr(0, 200);
    try {
      const auto err = json::parse(res->body);
      if (err.contains("usage")) on_failed_usage(err.at("usage"));
    } catch (const json::exception&) {
    }
    if (!retryable(res->status)) {
      throw ProviderError("endpoint " + ep.base_url + path + " returned HTTP " +
                          std::to_string(res->status) + ": " + last_error);
    }
  }
  throw ProviderExhausted("endpoint " + ep.base_url + path + " failed after " +
                              std::to_string(ep.retry.retry_budget + 1) + " attempts (last status " +
                              std::to_string(last_status) + (last_error.empty() ? "" : ", " + last_error) + ")",
                          last_status);
}

std::int64_t usage_field(const json& usage, const char* key) {
  if (usage.contains(key) && usage.at(key).is_number_integer()) return usage.at(key).get<std::int64_t>();
  return 0;
}

}  // namespace

OpenAiChat::OpenAiChat(EndpointConfig endpoint, PriceTable prices, std::shared_ptr<UsageLedger> ledger)
    : endpoint_(std::move(endpoint)), prices_(std::move(prices)), ledger_(std::move(ledger)) {}

ChatExchange OpenAiChat::chat(const ChatRequest& request) {
  ChatExchange ex;
  ex.request = request;
  ex.request.model = endpoint_.model;
  ex.kind = classify_prompt(request.system, request.user);

  json payload;
  payload["model"] = endpoint_.model;
  payload["messages"] = json::array({json{{"role", "system"}, {"content", request.system}},
                                     json{{"role", "user"}, {"content", request.user}}});
  payload["temperature"] = request.temperature;
  payload["max_tokens"] = request.max_tokens;

  auto on_failed = [&](const json& usage) {
    const auto pt = usage_field(usage, "prompt_tokens");
    const auto ct = usage_field(usage, "completion_tokens");
    if (ledger_) ledger_->record({false, endpoint_.model, pt, ct, prices_.chat_cost(endpoint_.model, pt, ct), false});
  };
  const Reply reply = post_with_retries(endpoint_, "/chat/completions", payload, network_calls_, on_failed);
  try {
    const auto& choice = reply.body.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    ex.response.text = content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& ex2) {
    throw ProviderError(std::string("chat response lacks choices[0].message.content: ") + ex2.what());
  }
  if (reply.body.contains("usage")) {
    ex.response.prompt_tokens = usage_field(reply.body.at("usage"), "prompt_tokens");
    ex.response.completion_tokens = usage_field(reply.body.at("usage"), "completion_tokens");
  }
  ex.response.retries = reply.retries;
  ex.response.latency_seconds = reply.latency_seconds;
  ex.cost_usd = prices_.chat_cost(endpoint_.model, ex.response.prompt_tokens, ex.response.completion_tokens);
  if (ledger_) {
    ledger_->record({false, endpoint_.model, ex.response.prompt_tokens, ex.response.completion_tokens, ex.cost_usd, true});
  }
  return ex;
}

OpenAiEmbedding::OpenAiEmbedding(EndpointConfig endpoint, std::size_t dimension, PriceTable prices,
                                 std::shared_ptr<UsageLedger> ledger)
    : endpoint_(std::move(endpoint)), dimension_(dimension), prices_(std::move(prices)), ledger_(std::move(ledger)) {}

EmbeddingResult OpenAiEmbedding::embed(std::string_view text) {
  if (text.empty()) throw ProviderError("cannot embed empty text");
  json payload;
  payload["model"] = endpoint_.model;
  payload["input"] = std::string(text);

  auto on_failed = [&](const json& usage) {
    const auto tokens = usage_field(usage, "prompt_tokens");
    if (ledger_) ledger_->record({true, endpoint_.model, tokens, 0, prices_.embedding_cost(endpoint_.model, tokens), false});
  };
  const Reply reply = post_with_retries(endpoint_, "/embeddings", payload, network_calls_, on_failed);
  EmbeddingResult r;
  try {
    r.vector = reply.body.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& ex) {
    throw ProviderError(std::string("embedding response lacks data[0].embedding: ") + ex.what());
  }
  if (r.vector.size() != dimension_) {
    throw ProviderError("embedding has dimension " + std::to_string(r.vector.size()) + ", expected " +
                        std::to_string(dimension_));
  }
  normalize(r.vector);
  if (reply.body.contains("usage")) r.tokens = usage_field(reply.body.at("usage"), "prompt_tokens");
  r.retries = reply.retries;
  r.cost_usd = prices_.embedding_cost(endpoint_.model, r.tokens);
  if (ledger_) ledger_->record({true, endpoint_.model, r.tokens, 0, r.cost_usd, true});
  return r;
}

}  // namespace stratevo
