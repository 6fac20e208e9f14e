#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stratevo/archive.hpp"
#include "stratevo/config.hpp"
#include "stratevo/navigation.hpp"
#include "stratevo/providers.hpp"
#include "stratevo/rng.hpp"
#include "stratevo/tasks.hpp"

namespace stratevo {

enum class Route { base, strategy, skipped };

std::string_view to_string(Route r);
Route route_from_string(std::string_view s);

struct TrajectoryRecord {
  int generation = 0;
  std::optional<double> fitness;  // empty when the generation produced no candidate
  double best_so_far = 0.0;
  double cumulative_cost_usd = 0.0;
  Route route = Route::skipped;
  std::optional<int> guidance_gen;  // refreshed_at of the guidance shown to SA

  bool operator==(const TrajectoryRecord&) const = default;
};

std::string trajectory_row(const TrajectoryRecord& r);
TrajectoryRecord parse_trajectory_row(std::string_view line);

/// Reads trajectory.csv. Throws LogError citing the line on malformed rows.
std::vector<TrajectoryRecord> read_trajectory(const std::filesystem::path& path);

struct RunTotals {
  std::uint64_t chat_calls = 0;
  std::uint64_t embedding_calls = 0;
  std::uint64_t sln_refreshes = 0;
  double cost_usd = 0.0;
  double wall_seconds = 0.0;
};

struct RunResult {
  ArchiveEntry best;
  std::vector<TrajectoryRecord> trajectory;
  RunTotals totals;
  bool completed = false;
};

/// With probability `elite_probability` the global best, otherwise the
/// winner of a size-`tournament_size` tournament drawn with replacement.
/// Always consumes one uniform draw, plus the tournament draws when held.
const ArchiveEntry& base_select(const Archive& archive, Rng& rng, int tournament_size = 3,
                                double elite_probability = 0.1);

/// Highest fitness among `entries()[i]`, smallest id on ties.
const ArchiveEntry& tournament_winner(const Archive& archive, std::span<const std::size_t> indices);

/// Base iff the next uniform draw is below `epsilon`.
Route epsilon_route(Rng& rng, double epsilon);

Prompt build_base_prompt(const ArchiveEntry& parent, std::string_view task_brief);

/// Asks for an improved program up to `attempts` times and returns the first
/// fenced block of the first reply that has one.
std::optional<std::string> base_mutate(const ArchiveEntry& parent, std::string_view task_brief,
                                       ChatProvider& chat, int generation, int attempts,
                                       const ExchangeObserver& observer = {}, const ChatRequest& settings = {});

struct EngineOptions {
  /// Stop after committing this generation, as if the process were killed.
  std::optional<int> halt_after;
  /// Program used at t=0 instead of the task's stock seed.
  std::optional<std::string> seed_program;
};

/// Runs the search loop against one run directory. All state changes are
/// appended to the directory's logs, and every generation ends with a
/// checkpoint so that an interrupted run can be resumed exactly.
class Engine {
 public:
  Engine(RunConfig config, const Task& task, ChatProvider& chat, EmbeddingProvider& embedder,
         CandidateExecutor& executor, EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Starts a run in `run_dir`, which must not hold an earlier run.
  RunResult run(const std::filesystem::path& run_dir);

  /// Continues the run in `run_dir` from its last checkpoint. A finished run
  /// is returned unchanged.
  RunResult resume(const std::filesystem::path& run_dir);

 private:
  struct State;
  RunResult loop();

  RunConfig config_;
  const Task& task_;
  ChatProvider& chat_;
  EmbeddingProvider& embedder_;
  CandidateExecutor& executor_;
  EngineOptions options_;
  std::unique_ptr<State> state_;
};

}  // namespace stratevo
