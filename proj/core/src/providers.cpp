#include "stratevo/providers.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"

namespace stratevo {

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::sa:
      return "sa";
    case PromptKind::sln:
      return "sln";
    case PromptKind::base:
      return "base";
    case PromptKind::describe:
      return "describe";
    case PromptKind::unknown:
      return "unknown";
  }
  return "unknown";
}

PromptKind prompt_kind_from_string(std::string_view s) {
  if (s == "sa") return PromptKind::sa;
  if (s == "sln") return PromptKind::sln;
  if (s == "base") return PromptKind::base;
  if (s == "describe") return PromptKind::describe;
  if (s == "unknown") return PromptKind::unknown;
  throw Error("unknown prompt kind '" + std::string(s) + "'");
}

PromptKind classify_prompt(std::string_view system, std::string_view user) {
  auto has = [&](std::string_view marker) {
    return system.find(marker) != std::string_view::npos || user.find(marker) != std::string_view::npos;
  };
  if (has("```UNEXPLORED")) return PromptKind::sln;
  if (has("```STRATEGY")) return PromptKind::sa;
  if (has("```DESCRIPTION")) return PromptKind::describe;
  if (has("```PROGRAM")) return PromptKind::base;
  return PromptKind::unknown;
}

double PriceTable::chat_cost(const std::string& model, std::int64_t prompt_tokens,
                             std::int64_t completion_tokens) const {
  auto it = prices_.find(model);
  if (it == prices_.end()) return 0.0;
  return static_cast<double>(prompt_tokens) * (it->second.input_per_mtok / 1e6) +
         static_cast<double>(completion_tokens) * (it->second.output_per_mtok / 1e6);
}

double PriceTable::embedding_cost(const std::string& model, std::int64_t tokens) const {
  return chat_cost(model, tokens, 0);
}

void UsageLedger::record(UsageRecord r) {
  std::lock_guard lock(mutex_);
  records_.push_back(std::move(r));
}

std::vector<UsageRecord> UsageLedger::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

double UsageLedger::total_cost() const {
  std::lock_guard lock(mutex_);
  double total = 0.0;
  for (const auto& r : records_) total += r.cost_usd;
  return total;
}

std::size_t UsageLedger::chat_calls() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : records_) n += r.embedding ? 0 : 1;
  return n;
}

std::size_t UsageLedger::embedding_calls() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : records_) n += r.embedding ? 1 : 0;
  return n;
}

void normalize(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  const double norm = std::sqrt(sum);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ProviderError("embedding vector has zero or non-finite norm");
  for (double& x : v) x /= norm;
}

std::int64_t count_words(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Scenario

namespace {

using json = nlohmann::json;

}  // namespace

Scenario Scenario::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ProviderError(std::string("scenario is not valid JSON: ") + ex.what());
  }
  Scenario s;
  try {
    if (j.contains("steps")) {
      for (const auto& step : j.at("steps")) {
        ScenarioStep st;
        st.kind = prompt_kind_from_string(step.at("kind").get<std::string>());
        if (step.contains("generation") && !step.at("generation").is_null()) {
          st.generation = step.at("generation").get<int>();
        }
        st.response = step.at("response").get<std::string>();
        s.steps.push_back(std::move(st));
      }
    }
    if (j.contains("defaults")) {
      for (const auto& [kind, text] : j.at("defaults").items()) {
        s.defaults[prompt_kind_from_string(kind)] = text.get<std::string>();
      }
    }
    s.echo = j.value("echo", false);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ProviderError(std::string("malformed scenario: ") + ex.what());
  }
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderError("cannot open scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string Scenario::to_json_text() const {
  nlohmann::ordered_json j;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& st : steps) {
    nlohmann::ordered_json step;
    step["kind"] = std::string(to_string(st.kind));
    if (st.generation) step["generation"] = *st.generation;
    step["response"] = st.response;
    j["steps"].push_back(std::move(step));
  }
  nlohmann::ordered_json defs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : defaults) defs[std::string(to_string(k))] = v;
  j["defaults"] = std::move(defs);
  j["echo"] = echo;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// MockChat

std::string echo_reply(PromptKind kind, const ChatRequest& request) {
  static constexpr std::string_view kParentTags[] = {"PARENT_PROGRAM"};
  static constexpr std::string_view kCandidateTags[] = {"CANDIDATE_PROGRAM"};
  const std::string gen = std::to_string(request.generation);
  switch (kind) {
    case PromptKind::sa: {
      const auto program = tagged_section(request.user, "PARENT_PROGRAM", kParentTags).value_or("");
      return "```DIAGNOSIS\nNo diagnosis from the echo mock.\n```\n\n```STRATEGY\n"
             "Keep the parent construction unchanged (echo at generation " + gen +
             ").\n```\n\n```PROGRAM\n" + program + "\n```\n";
    }
    case PromptKind::base: {
      const auto program = tagged_section(request.user, "PARENT_PROGRAM", kParentTags).value_or("");
      return "```PROGRAM\n" + program + "\n```\n";
    }
    case PromptKind::describe: {
      const auto program = tagged_section(request.user, "CANDIDATE_PROGRAM", kCandidateTags).value_or("");
      return "```DESCRIPTION\nConstruction with " + std::to_string(count_words(program)) +
             " source tokens, checksum " + std::to_string(fnv1a64(program) % 100000) + ".\n```\n";
    }
    case PromptKind::sln:
      return "```EFFECTIVE\nDirect explicit constructions.\n```\n\n"
             "```SATURATED\nUnchanged copies of the parent.\n```\n\n"
             "```UNEXPLORED\nLocal refinement of the best construction.\n```\n\n"
             "```GUIDANCE\nPerturb the best construction and keep what improves.\n```\n";
    case PromptKind::unknown:
      break;
  }
  return "";
}

MockChat::MockChat(Scenario scenario, PriceTable prices, std::shared_ptr<UsageLedger> ledger)
    : scenario_(std::move(scenario)),
      consumed_(scenario_.steps.size(), false),
      prices_(std::move(prices)),
      ledger_(std::move(ledger)) {}

std::string MockChat::next_reply(PromptKind kind, int generation, const ChatRequest& request) {
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < scenario_.steps.size() && !pick; ++i) {
    const auto& st = scenario_.steps[i];
    if (!consumed_[i] && st.kind == kind && st.generation == generation) pick = i;
  }
  for (std::size_t i = 0; i < scenario_.steps.size() && !pick; ++i) {
    const auto& st = scenario_.steps[i];
    if (!consumed_[i] && st.kind == kind && !st.generation) pick = i;
  }
  if (pick) {
    consumed_[*pick] = true;
    return scenario_.steps[*pick].response;
  }
  if (auto it = scenario_.defaults.find(kind); it != scenario_.defaults.end()) return it->second;
  if (scenario_.echo) return echo_reply(kind, request);

  std::size_t unconsumed = scenario_.steps.size();
  for (std::size_t i = 0; i < scenario_.steps.size(); ++i) {
    if (!consumed_[i]) {
      unconsumed = i;
      break;
    }
  }
  throw ScenarioExhausted("mock scenario exhausted: no step for a '" + std::string(to_string(kind)) +
                          "' call at generation " + std::to_string(generation) +
                          " (next unconsumed step index: " +
                          (unconsumed == scenario_.steps.size() ? std::string("none")
                                                                : std::to_string(unconsumed)) +
                          ", " + std::to_string(scenario_.steps.size()) + " steps total)");
}

ChatExchange MockChat::chat(const ChatRequest& request) {
  ChatExchange ex;
  ex.request = request;
  ex.request.model = kModel;
  ex.kind = classify_prompt(request.system, request.user);
  {
    std::lock_guard lock(mutex_);
    ex.response.text = next_reply(ex.kind, request.generation, request);
  }
  ex.response.prompt_tokens = count_words(request.system) + count_words(request.user);
  ex.response.completion_tokens = count_words(ex.response.text);
  ex.cost_usd = prices_.chat_cost(kModel, ex.response.prompt_tokens, ex.response.completion_tokens);
  if (ledger_) {
    ledger_->record({false, kModel, ex.response.prompt_tokens, ex.response.completion_tokens, ex.cost_usd, true});
  }
  return ex;
}

void MockChat::restore(std::span<const ChatCallKey> history) {
  ChatRequest dummy;
  for (const auto& call : history) {
    std::lock_guard lock(mutex_);
    dummy.generation = call.generation;
    try {
      next_reply(call.kind, call.generation, dummy);
    } catch (const ScenarioExhausted&) {
      // The original call failed the same way; nothing was consumed.
    }
  }
}

std::size_t MockChat::consumed_steps() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (bool c : consumed_) n += c ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------
// HashEmbedder

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed, PriceTable prices,
                           std::shared_ptr<UsageLedger> ledger)
    : dimension_(dimension), seed_(seed), prices_(std::move(prices)), ledger_(std::move(ledger)) {
  if (dimension_ == 0) throw ProviderError("embedding dimension must be positive");
}

EmbeddingResult HashEmbedder::embed(std::string_view text) {
  if (text.empty()) throw ProviderError("cannot embed empty text");
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::vector<double> v(dimension_, 0.0);
  const std::uint64_t basis = fnv1a64(std::to_string(seed_));
  auto add = [&](std::string_view feature, double weight) {
    const std::uint64_t h = fnv1a64(feature, basis);
    v[h % dimension_] += (h >> 63) != 0 ? -weight : weight;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    add(words[i], 1.0);
    if (i + 1 < words.size()) add(words[i] + ' ' + words[i + 1], 0.5);
  }
  add(std::string("\x01") + std::string(text), 0.25);
  normalize(v);

  EmbeddingResult r;
  r.vector = std::move(v);
  r.tokens = count_words(text);
  r.cost_usd = prices_.embedding_cost(kModel, r.tokens);
  if (ledger_) ledger_->record({true, kModel, r.tokens, 0, r.cost_usd, true});
  return r;
}

}  // namespace stratevo
