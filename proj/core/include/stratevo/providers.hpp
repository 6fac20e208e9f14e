#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stratevo {

/// Which pipeline stage a chat prompt belongs to, recovered from the fence
/// tags our own templates request.
enum class PromptKind { sa, sln, base, describe, unknown };

std::string_view to_string(PromptKind k);
PromptKind prompt_kind_from_string(std::string_view s);
PromptKind classify_prompt(std::string_view system, std::string_view user);

/// A rendered system/user prompt pair.
struct Prompt {
  std::string system;
  std::string user;
};

struct ChatRequest {
  std::string system;
  std::string user;
  std::string model;
  double temperature = 0.7;
  int max_tokens = 4096;
  int generation = 0;  // bookkeeping only, never sent over the wire
};

struct ChatResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double latency_seconds = 0.0;
  int retries = 0;
};

struct ChatExchange {
  ChatRequest request;
  ChatResponse response;
  PromptKind kind = PromptKind::unknown;
  double cost_usd = 0.0;
};

struct EmbeddingResult {
  std::vector<double> vector;  // unit L2 norm
  std::int64_t tokens = 0;
  double cost_usd = 0.0;
  int retries = 0;
};

/// USD per million tokens.
struct ModelPrice {
  double input_per_mtok = 0.0;
  double output_per_mtok = 0.0;
};

class PriceTable {
 public:
  PriceTable() = default;
  explicit PriceTable(std::map<std::string, ModelPrice> prices) : prices_(std::move(prices)) {}

  /// Unknown models cost nothing.
  double chat_cost(const std::string& model, std::int64_t prompt_tokens,
                   std::int64_t completion_tokens) const;
  double embedding_cost(const std::string& model, std::int64_t tokens) const;
  const std::map<std::string, ModelPrice>& prices() const noexcept { return prices_; }

 private:
  std::map<std::string, ModelPrice> prices_;
};

struct UsageRecord {
  bool embedding = false;
  std::string model;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost_usd = 0.0;
  bool succeeded = true;
};

/// Thread-safe running account of every provider call.
class UsageLedger {
 public:
  void record(UsageRecord r);
  std::vector<UsageRecord> records() const;
  double total_cost() const;
  std::size_t chat_calls() const;
  std::size_t embedding_calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<UsageRecord> records_;
};

using ExchangeObserver = std::function<void(const ChatExchange&)>;

/// Identifies a past chat call so a stateful mock can be fast-forwarded on resume.
struct ChatCallKey {
  PromptKind kind;
  int generation;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Throws ProviderExhausted when the retry budget is spent.
  virtual ChatExchange chat(const ChatRequest& request) = 0;
  /// Replays the effect of calls made before an interruption.
  virtual void restore(std::span<const ChatCallKey> /*history*/) {}
  virtual std::uint64_t network_calls() const { return 0; }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingResult embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::uint64_t network_calls() const { return 0; }
};

/// Scales `v` to unit length. Throws ProviderError on a zero or non-finite vector.
void normalize(std::vector<double>& v);

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP clients

struct RetryPolicy {
  int retry_budget = 3;          // retries after the first attempt
  int backoff_initial_ms = 500;  // doubled after every failed attempt
  int backoff_max_ms = 30000;
};

struct EndpointConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 120.0;
  RetryPolicy retry;
};

class OpenAiChat final : public ChatProvider {
 public:
  OpenAiChat(EndpointConfig endpoint, PriceTable prices, std::shared_ptr<UsageLedger> ledger);
  ChatExchange chat(const ChatRequest& request) override;
  std::uint64_t network_calls() const override { return network_calls_; }

 private:
  EndpointConfig endpoint_;
  PriceTable prices_;
  std::shared_ptr<UsageLedger> ledger_;
  std::atomic<std::uint64_t> network_calls_{0};
};

class OpenAiEmbedding final : public EmbeddingProvider {
 public:
  OpenAiEmbedding(EndpointConfig endpoint, std::size_t dimension, PriceTable prices,
                  std::shared_ptr<UsageLedger> ledger);
  EmbeddingResult embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }
  std::uint64_t network_calls() const override { return network_calls_; }

 private:
  EndpointConfig endpoint_;
  std::size_t dimension_;
  PriceTable prices_;
  std::shared_ptr<UsageLedger> ledger_;
  std::atomic<std::uint64_t> network_calls_{0};
};

// ---------------------------------------------------------------------------
// Deterministic mocks

struct ScenarioStep {
  PromptKind kind = PromptKind::unknown;
  std::optional<int> generation;  // when set, the step only answers calls from that generation
  std::string response;
};

/// Scripted replies for MockChat.
///
/// A call of kind k at generation g consumes the first unconsumed step of
/// kind k pinned to g, else the first unconsumed unpinned step of kind k,
/// else the per-kind default, else an echo reply when `echo` is set.
struct Scenario {
  std::vector<ScenarioStep> steps;
  std::map<PromptKind, std::string> defaults;
  bool echo = false;

  static Scenario from_json_text(std::string_view text);
  static Scenario load(const std::string& path);
  std::string to_json_text() const;
};

class MockChat final : public ChatProvider {
 public:
  static constexpr const char* kModel = "mock-chat";

  MockChat(Scenario scenario, PriceTable prices, std::shared_ptr<UsageLedger> ledger);
  ChatExchange chat(const ChatRequest& request) override;
  void restore(std::span<const ChatCallKey> history) override;

  std::size_t consumed_steps() const;

 private:
  std::string next_reply(PromptKind kind, int generation, const ChatRequest& request);

  Scenario scenario_;
  std::vector<bool> consumed_;
  PriceTable prices_;
  std::shared_ptr<UsageLedger> ledger_;
  mutable std::mutex mutex_;
};

/// The canned reply MockChat gives when echoing: parent programs are returned
/// unchanged and descriptions/guidance are fixed text.
std::string echo_reply(PromptKind kind, const ChatRequest& request);

/// Maps text to a unit vector by hashing word unigrams and bigrams into
/// signed buckets. Identical texts give identical vectors; nothing else is promised.
class HashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr const char* kModel = "mock-embedding";

  HashEmbedder(std::size_t dimension, std::uint64_t seed, PriceTable prices = {},
               std::shared_ptr<UsageLedger> ledger = nullptr);
  EmbeddingResult embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
  PriceTable prices_;
  std::shared_ptr<UsageLedger> ledger_;
};

/// Whitespace-delimited word count; the token measure used by the mocks.
std::int64_t count_words(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 1469598103934665603ULL);

}  // namespace stratevo
