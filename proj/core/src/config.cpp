#include "stratevo/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"

namespace stratevo {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool ProviderConfig::operator==(const ProviderConfig& o) const {
  auto ep_eq = [](const EndpointConfig& a, const EndpointConfig& b) {
    return a.base_url == b.base_url && a.model == b.model && a.api_key_env == b.api_key_env &&
           a.timeout_seconds == b.timeout_seconds && a.retry.retry_budget == b.retry.retry_budget &&
           a.retry.backoff_initial_ms == b.retry.backoff_initial_ms && a.retry.backoff_max_ms == b.retry.backoff_max_ms;
  };
  auto prices_eq = [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first || ia->second.input_per_mtok != ib->second.input_per_mtok ||
          ia->second.output_per_mtok != ib->second.output_per_mtok)
        return false;
    }
    return true;
  };
  return kind == o.kind && scenario_path == o.scenario_path && embedding_dim == o.embedding_dim &&
         embedding_seed == o.embedding_seed && ep_eq(chat, o.chat) && ep_eq(embedding, o.embedding) &&
         prices_eq(prices, o.prices) && temperature == o.temperature && max_tokens == o.max_tokens;
}

bool RunConfig::operator==(const RunConfig& o) const { return config_to_json(*this) == config_to_json(o); }

std::string_view to_string(ProviderConfig::Kind k) { return k == ProviderConfig::Kind::mock ? "mock" : "openai"; }
std::string_view to_string(ExecutorConfig::Kind k) {
  return k == ExecutorConfig::Kind::literal ? "literal" : "subprocess";
}

namespace {

/// Reads typed fields from one JSON object and rejects leftovers.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(name(key), "must be a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(name(key), "must be an integer");
        if (std::is_unsigned_v<T> && v->is_number_integer() && !v->is_number_unsigned() &&
            v->get<std::int64_t>() < 0) {
          throw ConfigError(name(key), "must be non-negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(name(key), "must be a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError(name(key), "must be a string");
      }
      out = v->get<T>();
    } catch (const json::exception& ex) {
      throw ConfigError(name(key), ex.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(name(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal().string();
}

void read_endpoint(Fields& f, const std::string& key, EndpointConfig& ep, std::size_t* dimension) {
  const json* v = f.get(key);
  if (v == nullptr) return;
  Fields e(*v, f.name(key));
  e.read("base_url", ep.base_url);
  e.read("model", ep.model);
  e.read("api_key_env", ep.api_key_env);
  e.read("timeout_s", ep.timeout_seconds);
  if (dimension != nullptr) e.read("dimension", *dimension);
  e.finish();
}

void read_prices(Fields& f, std::map<std::string, ModelPrice>& prices) {
  const json* v = f.get("prices");
  if (v == nullptr) return;
  Fields table(*v, f.name("prices"));
  for (const auto& [model, entry] : v->items()) {
    Fields p(*table.get(model), table.name(model));
    ModelPrice price;
    p.read("input_per_mtok", price.input_per_mtok);
    p.read("output_per_mtok", price.output_per_mtok);
    p.finish();
    prices[model] = price;
  }
  table.finish();
}

void read_provider(const json& v, ProviderConfig& pc, const std::filesystem::path& base) {
  if (v.is_string()) {
    const auto kind = v.get<std::string>();
    if (kind == "mock") {
      pc.kind = ProviderConfig::Kind::mock;
    } else if (kind == "openai") {
      pc.kind = ProviderConfig::Kind::openai;
    } else {
      throw ConfigError("provider", "unknown provider '" + kind + "'");
    }
  } else {
    Fields f(v, "provider");
    std::string kind = "mock";
    f.read("kind", kind);
    if (kind == "mock") {
      pc.kind = ProviderConfig::Kind::mock;
    } else if (kind == "openai") {
      pc.kind = ProviderConfig::Kind::openai;
    } else {
      throw ConfigError("provider.kind", "unknown provider '" + kind + "'");
    }
    if (pc.kind == ProviderConfig::Kind::openai) {
      pc.embedding_dim = 1536;
      pc.chat.base_url = pc.embedding.base_url = "https://api.openai.com/v1";
      pc.chat.model = "gpt-4o-mini";
      pc.embedding.model = "text-embedding-3-small";
    }
    std::string scenario;
    f.read("scenario", scenario);
    if (!scenario.empty()) pc.scenario_path = resolve(scenario, base);
    f.read("embedding_dim", pc.embedding_dim);
    f.read("embedding_seed", pc.embedding_seed);
    read_endpoint(f, "chat", pc.chat, nullptr);
    read_endpoint(f, "embedding", pc.embedding, &pc.embedding_dim);
    int retry_budget = pc.chat.retry.retry_budget;
    int backoff = pc.chat.retry.backoff_initial_ms;
    f.read("retry_budget", retry_budget);
    f.read("backoff_ms", backoff);
    pc.chat.retry.retry_budget = pc.embedding.retry.retry_budget = retry_budget;
    pc.chat.retry.backoff_initial_ms = pc.embedding.retry.backoff_initial_ms = backoff;
    read_prices(f, pc.prices);
    f.read("temperature", pc.temperature);
    f.read("max_tokens", pc.max_tokens);
    f.finish();
    return;
  }
  if (pc.kind == ProviderConfig::Kind::openai) {
    pc.embedding_dim = 1536;
    pc.chat.base_url = pc.embedding.base_url = "https://api.openai.com/v1";
    pc.chat.model = "gpt-4o-mini";
    pc.embedding.model = "text-embedding-3-small";
  }
}

void read_task(const json& v, TaskConfig& tc) {
  if (v.is_string()) {
    tc.id = v.get<std::string>();
    return;
  }
  Fields f(v, "task");
  f.read("id", tc.id);
  std::size_t n = 0;
  if (f.get("n") != nullptr) {
    f.read("n", n);
    tc.n = n;
  }
  f.read("instances", tc.instances);
  f.read("instance_seed", tc.instance_seed);
  f.read("check_container", tc.check_container);
  f.finish();
}

void read_executor(const json& v, ExecutorConfig& ec, const std::filesystem::path& base, bool& explicit_kind) {
  Fields f(v, "executor");
  std::string kind;
  f.read("kind", kind);
  if (kind == "literal") {
    ec.kind = ExecutorConfig::Kind::literal;
    explicit_kind = true;
  } else if (kind == "subprocess") {
    ec.kind = ExecutorConfig::Kind::subprocess;
    explicit_kind = true;
  } else if (!kind.empty()) {
    throw ConfigError("executor.kind", "unknown executor '" + kind + "'");
  }
  if (const json* cmd = f.get("command")) {
    if (!cmd->is_array()) throw ConfigError("executor.command", "must be an array of strings");
    ec.command.clear();
    for (const auto& a : *cmd) {
      if (!a.is_string()) throw ConfigError("executor.command", "must be an array of strings");
      ec.command.push_back(a.get<std::string>());
    }
    // Script paths given relative to the config file.
    for (auto& a : ec.command) {
      if (!a.empty() && a.find('/') != std::string::npos && std::filesystem::path(a).is_relative()) {
        a = resolve(a, base);
      }
    }
  }
  f.read("candidate_file", ec.candidate_file);
  f.read("timeout_s", ec.timeout_seconds);
  f.finish();
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.total_generations < 1) throw ConfigError("generations", "must be >= 1");
  if (c.warmup < 0) throw ConfigError("warmup", "must be >= 0");
  if (c.sln_interval < 1) throw ConfigError("sln_interval", "must be >= 1");
  if (c.clusters < 1) throw ConfigError("clusters", "must be >= 1");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in [0, 1]");
  if (c.capacity < 2) throw ConfigError("capacity", "must be >= 2");
  if (c.sa_parse_attempts < 1) throw ConfigError("sa_parse_attempts", "must be >= 1");
  if (c.sln_parse_attempts < 1) throw ConfigError("sln_parse_attempts", "must be >= 1");
  if (c.tournament_size < 1) throw ConfigError("tournament_size", "must be >= 1");
  if (!(c.elite_probability >= 0.0 && c.elite_probability <= 1.0)) {
    throw ConfigError("elite_probability", "must lie in [0, 1]");
  }
  static const std::set<std::string> kTasks = {"circle_packing_square", "circle_packing_rect", "minmax_distance",
                                               "integer_sequences"};
  if (!kTasks.contains(c.task.id)) throw ConfigError("task.id", "unknown task '" + c.task.id + "'");
  if (c.task.n && *c.task.n < 1) throw ConfigError("task.n", "must be >= 1");
  if (c.task.instances < 1) throw ConfigError("task.instances", "must be >= 1");
  if (c.providers.embedding_dim < 1) throw ConfigError("provider.embedding_dim", "must be >= 1");
  if (c.providers.chat.retry.retry_budget < 0) throw ConfigError("provider.retry_budget", "must be >= 0");
  if (c.providers.chat.retry.backoff_initial_ms < 0) throw ConfigError("provider.backoff_ms", "must be >= 0");
  if (c.providers.max_tokens < 1) throw ConfigError("provider.max_tokens", "must be >= 1");
  for (const auto& [model, p] : c.providers.prices) {
    if (!(p.input_per_mtok >= 0.0) || !(p.output_per_mtok >= 0.0)) {
      throw ConfigError("provider.prices." + model, "prices must be >= 0");
    }
  }
  if (c.providers.kind == ProviderConfig::Kind::openai) {
    if (c.providers.chat.base_url.empty()) throw ConfigError("provider.chat.base_url", "is required");
    if (c.providers.chat.model.empty()) throw ConfigError("provider.chat.model", "is required");
    if (c.providers.embedding.model.empty()) throw ConfigError("provider.embedding.model", "is required");
  }
  if (!(c.executor.timeout_seconds > 0.0)) throw ConfigError("executor.timeout_s", "must be > 0");
  if (c.executor.kind == ExecutorConfig::Kind::subprocess && c.executor.command.empty()) {
    throw ConfigError("executor.command", "is required for the subprocess executor");
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + ex.what());
  }
  RunConfig c;
  Fields f(j, "");
  if (const json* t = f.get("task")) {
    read_task(*t, c.task);
  } else {
    throw ConfigError("task", "is required");
  }
  f.read("generations", c.total_generations);
  f.read("warmup", c.warmup);
  f.read("sln_interval", c.sln_interval);
  f.read("clusters", c.clusters);
  f.read("epsilon", c.epsilon);
  f.read("capacity", c.capacity);
  f.read("seed", c.seed);
  f.read("sa_parse_attempts", c.sa_parse_attempts);
  f.read("sln_parse_attempts", c.sln_parse_attempts);
  f.read("sln_entry_budget", c.sln_entry_budget);
  f.read("tournament_size", c.tournament_size);
  f.read("elite_probability", c.elite_probability);
  if (const json* p = f.get("provider")) read_provider(*p, c.providers, base_dir);
  bool explicit_executor = false;
  if (const json* e = f.get("executor")) read_executor(*e, c.executor, base_dir, explicit_executor);
  if (!explicit_executor) {
    c.executor.kind = c.providers.kind == ProviderConfig::Kind::mock || c.executor.command.empty()
                          ? ExecutorConfig::Kind::literal
                          : ExecutorConfig::Kind::subprocess;
  }
  std::string seed_program;
  f.read("seed_program", seed_program);
  if (!seed_program.empty()) c.seed_program_path = resolve(seed_program, base_dir);
  std::string out;
  f.read("output_dir", out);
  if (!out.empty()) c.output_dir = resolve(out, base_dir);
  f.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c, int indent) {
  auto endpoint = [](const EndpointConfig& ep) {
    return ordered_json{{"base_url", ep.base_url},
                        {"model", ep.model},
                        {"api_key_env", ep.api_key_env},
                        {"timeout_s", ep.timeout_seconds}};
  };
  ordered_json task;
  task["id"] = c.task.id;
  if (c.task.n) task["n"] = *c.task.n;
  task["instances"] = c.task.instances;
  task["instance_seed"] = c.task.instance_seed;
  task["check_container"] = c.task.check_container;

  ordered_json provider;
  provider["kind"] = std::string(to_string(c.providers.kind));
  if (c.providers.scenario_path) provider["scenario"] = *c.providers.scenario_path;
  provider["embedding_dim"] = c.providers.embedding_dim;
  provider["embedding_seed"] = c.providers.embedding_seed;
  provider["chat"] = endpoint(c.providers.chat);
  provider["embedding"] = endpoint(c.providers.embedding);
  provider["retry_budget"] = c.providers.chat.retry.retry_budget;
  provider["backoff_ms"] = c.providers.chat.retry.backoff_initial_ms;
  ordered_json prices = ordered_json::object();
  for (const auto& [model, p] : c.providers.prices) {
    prices[model] = ordered_json{{"input_per_mtok", p.input_per_mtok}, {"output_per_mtok", p.output_per_mtok}};
  }
  provider["prices"] = prices;
  provider["temperature"] = c.providers.temperature;
  provider["max_tokens"] = c.providers.max_tokens;

  ordered_json executor;
  executor["kind"] = std::string(to_string(c.executor.kind));
  executor["command"] = c.executor.command;
  executor["candidate_file"] = c.executor.candidate_file;
  executor["timeout_s"] = c.executor.timeout_seconds;

  ordered_json j;
  j["task"] = task;
  j["generations"] = c.total_generations;
  j["warmup"] = c.warmup;
  j["sln_interval"] = c.sln_interval;
  j["clusters"] = c.clusters;
  j["epsilon"] = c.epsilon;
  j["capacity"] = c.capacity;
  j["seed"] = c.seed;
  j["sa_parse_attempts"] = c.sa_parse_attempts;
  j["sln_parse_attempts"] = c.sln_parse_attempts;
  j["sln_entry_budget"] = c.sln_entry_budget;
  j["tournament_size"] = c.tournament_size;
  j["elite_probability"] = c.elite_probability;
  j["provider"] = provider;
  j["executor"] = executor;
  if (c.seed_program_path) j["seed_program"] = *c.seed_program_path;
  if (c.output_dir) j["output_dir"] = *c.output_dir;
  return j.dump(indent);
}

std::string config_hash(const RunConfig& c) {
  RunConfig hashed = c;
  hashed.output_dir.reset();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(hashed))));
  return buf;
}

}  // namespace stratevo
