#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stratevo/providers.hpp"
#include "stratevo/tasks.hpp"

namespace stratevo {

struct ProviderConfig {
  enum class Kind { mock, openai };
  Kind kind = Kind::mock;
  std::optional<std::string> scenario_path;  // mock only; absent means echo replies
  std::size_t embedding_dim = 64;            // 1536 by default for openai
  std::uint64_t embedding_seed = 0;          // mock hash embedder
  EndpointConfig chat;
  EndpointConfig embedding;
  std::map<std::string, ModelPrice> prices;
  double temperature = 0.7;
  int max_tokens = 4096;

  bool operator==(const ProviderConfig&) const;
};

struct ExecutorConfig {
  enum class Kind { literal, subprocess };
  Kind kind = Kind::literal;
  std::vector<std::string> command;
  std::string candidate_file = "candidate.py";
  double timeout_seconds = 60.0;

  bool operator==(const ExecutorConfig&) const = default;
};

/// Every knob of a run. Defaults: T=100, K=10, delta=10, C=5, epsilon=0.2.
struct RunConfig {
  int total_generations = 100;
  int warmup = 10;
  int sln_interval = 10;
  std::size_t clusters = 5;
  double epsilon = 0.2;
  std::size_t capacity = 100;
  std::uint64_t seed = 0;

  TaskConfig task;
  ProviderConfig providers;
  ExecutorConfig executor;
  std::optional<std::string> seed_program_path;
  std::optional<std::string> output_dir;

  int sa_parse_attempts = 2;
  int sln_parse_attempts = 2;
  std::size_t sln_entry_budget = 200;
  int tournament_size = 3;
  double elite_probability = 0.1;

  bool operator==(const RunConfig&) const;
};

/// Parses and validates a config document. Omitted fields take their
/// defaults; unknown fields are rejected. Relative paths resolve against
/// `base_dir`. Throws ConfigError naming the offending field.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on the first out-of-range field.
void validate(const RunConfig& config);

/// Full config with every field spelled out, fixed key order.
std::string config_to_json(const RunConfig& config, int indent = -1);

/// Hex digest of config_to_json, ignoring output_dir.
std::string config_hash(const RunConfig& config);

std::string_view to_string(ProviderConfig::Kind k);
std::string_view to_string(ExecutorConfig::Kind k);

}  // namespace stratevo
