#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "stratevo/error.hpp"
#include "stratevo/providers.hpp"

namespace stratevo {
namespace {

ChatRequest request_of(PromptKind kind, int generation = 0) {
  ChatRequest r;
  r.generation = generation;
  switch (kind) {
    case PromptKind::sa: r.system = "```STRATEGY\n```PROGRAM"; break;
    case PromptKind::sln: r.system = "```EFFECTIVE\n```UNEXPLORED"; break;
    case PromptKind::describe: r.system = "```DESCRIPTION"; break;
    case PromptKind::base: r.system = "```PROGRAM"; break;
    case PromptKind::unknown: r.system = "plain"; break;
  }
  r.user = "user text";
  return r;
}

TEST(Classify, UsesFenceTags) {
  EXPECT_EQ(classify_prompt("```EFFECTIVE ```UNEXPLORED ```GUIDANCE", ""), PromptKind::sln);
  EXPECT_EQ(classify_prompt("```DIAGNOSIS ```STRATEGY ```PROGRAM", ""), PromptKind::sa);
  EXPECT_EQ(classify_prompt("", "```DESCRIPTION"), PromptKind::describe);
  EXPECT_EQ(classify_prompt("```PROGRAM", ""), PromptKind::base);
  EXPECT_EQ(classify_prompt("hello", "world"), PromptKind::unknown);
  for (auto k : {PromptKind::sa, PromptKind::sln, PromptKind::base, PromptKind::describe}) {
    EXPECT_EQ(prompt_kind_from_string(to_string(k)), k);
  }
}

TEST(PriceTable, CostIsLinearInTokens) {
  PriceTable prices({{"m", {2.0, 8.0}}});
  EXPECT_DOUBLE_EQ(prices.chat_cost("m", 1000, 500), 1000 * 2e-6 + 500 * 8e-6);
  EXPECT_DOUBLE_EQ(prices.embedding_cost("m", 250), 250 * 2e-6);
  EXPECT_EQ(prices.chat_cost("other", 1000, 1000), 0.0);
}

TEST(UsageLedger, Totals) {
  UsageLedger ledger;
  ledger.record({false, "m", 10, 5, 0.25, true});
  ledger.record({true, "e", 7, 0, 0.5, true});
  ledger.record({false, "m", 1, 0, 0.125, false});
  EXPECT_EQ(ledger.chat_calls(), 2u);
  EXPECT_EQ(ledger.embedding_calls(), 1u);
  EXPECT_DOUBLE_EQ(ledger.total_cost(), 0.875);
  EXPECT_EQ(ledger.records().size(), 3u);
}

TEST(MockChat, RepliesInScriptOrder) {
  Scenario s;
  for (int i = 0; i < 5; ++i) s.steps.push_back({PromptKind::base, std::nullopt, "reply " + std::to_string(i)});
  auto ledger = std::make_shared<UsageLedger>();
  MockChat chat(s, {}, ledger);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(chat.chat(request_of(PromptKind::base)).response.text, "reply " + std::to_string(i));
  EXPECT_EQ(chat.consumed_steps(), 5u);
  EXPECT_THROW(chat.chat(request_of(PromptKind::base)), ScenarioExhausted);
  EXPECT_EQ(ledger->chat_calls(), 5u);
  EXPECT_EQ(chat.network_calls(), 0u);
}

TEST(MockChat, ExhaustionNamesNextUnconsumedStep) {
  Scenario s;
  s.steps.push_back({PromptKind::describe, std::nullopt, "d"});
  s.steps.push_back({PromptKind::sln, std::nullopt, "g"});
  MockChat chat(s, {}, nullptr);
  chat.chat(request_of(PromptKind::describe));
  try {
    chat.chat(request_of(PromptKind::describe, 4));
    FAIL() << "expected ScenarioExhausted";
  } catch (const ScenarioExhausted& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step index: 1"), std::string::npos) << what;
    EXPECT_NE(what.find("generation 4"), std::string::npos) << what;
  }
}

TEST(MockChat, PinnedStepsDefaultsAndEcho) {
  Scenario s;
  s.steps.push_back({PromptKind::base, std::nullopt, "loose"});
  s.steps.push_back({PromptKind::base, 3, "pinned"});
  s.defaults[PromptKind::describe] = "fallback";
  MockChat chat(s, {}, nullptr);
  EXPECT_EQ(chat.chat(request_of(PromptKind::base, 3)).response.text, "pinned");
  EXPECT_EQ(chat.chat(request_of(PromptKind::base, 3)).response.text, "loose");
  EXPECT_EQ(chat.chat(request_of(PromptKind::describe)).response.text, "fallback");
  EXPECT_EQ(chat.chat(request_of(PromptKind::describe)).response.text, "fallback");
  EXPECT_THROW(chat.chat(request_of(PromptKind::base, 5)), ScenarioExhausted);

  Scenario echo;
  echo.echo = true;
  MockChat echoing(echo, {}, nullptr);
  ChatRequest r = request_of(PromptKind::base, 2);
  r.user = "```PARENT_PROGRAM\nx = 1\n```\n";
  EXPECT_EQ(echoing.chat(r).response.text, "```PROGRAM\nx = 1\n```\n");
}

TEST(MockChat, RestoreFastForwards) {
  Scenario s;
  s.steps.push_back({PromptKind::sa, std::nullopt, "a"});
  s.steps.push_back({PromptKind::describe, 1, "b"});
  s.steps.push_back({PromptKind::sa, std::nullopt, "c"});
  MockChat chat(s, {}, nullptr);
  const ChatCallKey history[] = {{PromptKind::sa, 1}, {PromptKind::describe, 1}};
  chat.restore(history);
  EXPECT_EQ(chat.consumed_steps(), 2u);
  EXPECT_EQ(chat.chat(request_of(PromptKind::sa, 2)).response.text, "c");
}

TEST(MockChat, TokensAndCost) {
  Scenario s;
  s.steps.push_back({PromptKind::base, std::nullopt, "one two three"});
  MockChat chat(s, PriceTable({{MockChat::kModel, {1e6, 2e6}}}), nullptr);
  ChatRequest r = request_of(PromptKind::base);  // "```PROGRAM" + "user text" = 3 words
  const ChatExchange ex = chat.chat(r);
  EXPECT_EQ(ex.response.prompt_tokens, 3);
  EXPECT_EQ(ex.response.completion_tokens, 3);
  EXPECT_DOUBLE_EQ(ex.cost_usd, 3 * 1.0 + 3 * 2.0);
  EXPECT_EQ(ex.kind, PromptKind::base);
}

TEST(Scenario, JsonRoundTrip) {
  const auto s = Scenario::from_json_text(
      R"({"steps":[{"kind":"sa","response":"x"},{"kind":"sln","generation":10,"response":"y"}],)"
      R"("defaults":{"describe":"d"},"echo":true})");
  ASSERT_EQ(s.steps.size(), 2u);
  EXPECT_EQ(s.steps[1].generation, 10);
  EXPECT_TRUE(s.echo);
  const auto again = Scenario::from_json_text(s.to_json_text());
  EXPECT_EQ(again.to_json_text(), s.to_json_text());
  EXPECT_THROW(Scenario::from_json_text("{"), ProviderError);
  EXPECT_THROW(Scenario::from_json_text(R"({"steps":[{"kind":"nope","response":""}]})"), ProviderError);
}

double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

TEST(HashEmbedder, DeterministicUnitVectors) {
  HashEmbedder a(64, 7), b(64, 7);
  const auto x = a.embed("Hexagonal lattice with refined radii");
  EXPECT_EQ(x.vector, b.embed("Hexagonal lattice with refined radii").vector);
  EXPECT_EQ(x.vector.size(), 64u);
  EXPECT_NEAR(norm(x.vector), 1.0, 1e-6);
  EXPECT_EQ(x.tokens, 5);
  for (const char* text : {"a", "grid", "simulated annealing over centres", "1 2 3 4 5 6 7 8 9 10"}) {
    EXPECT_NEAR(norm(a.embed(text).vector), 1.0, 1e-6) << text;
  }
  EXPECT_THROW(a.embed(""), ProviderError);
}

TEST(HashEmbedder, DistinctTextsDiffer) {
  HashEmbedder e(64, 7);
  EXPECT_NE(e.embed("greedy placement by decreasing radius").vector,
            e.embed("random restarts with local search").vector);
  HashEmbedder other_seed(64, 8);
  EXPECT_NE(e.embed("same text").vector, other_seed.embed("same text").vector);
}

TEST(Normalize, RejectsDegenerate) {
  std::vector<double> v{3.0, 4.0};
  normalize(v);
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(normalize(zero), ProviderError);
  std::vector<double> nan{NAN, 1.0};
  EXPECT_THROW(normalize(nan), ProviderError);
}

TEST(CountWords, Whitespace) {
  EXPECT_EQ(count_words(""), 0);
  EXPECT_EQ(count_words("  a\tb\n\nc  "), 3);
}

}  // namespace
}  // namespace stratevo
