#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

namespace stratevo {

struct RunReport {
  std::string task_id;
  bool partial = true;  // no summary yet
  int generations_done = 0;
  int total_generations = 0;
  double seed_fitness = 0.0;
  double best_fitness = 0.0;
  int generations_to_best = 0;  // first generation whose best-so-far equals the final best
  std::optional<double> reference;
  double total_cost_usd = 0.0;
  std::size_t base_generations = 0;
  std::size_t strategy_generations = 0;
  std::size_t skipped_generations = 0;
  std::filesystem::path trajectory_csv;
};

/// Reads a run directory without modifying it. Only committed generations count.
RunReport build_report(const std::filesystem::path& run_dir);

std::string format_report(const RunReport& report);

/// Writes id, generation, fitness, cluster, e_0.. for every live archive entry.
/// Clusters come from the run's own C and seed. Returns the number of rows.
std::size_t export_embeddings(const std::filesystem::path& run_dir, const std::filesystem::path& out_csv);

}  // namespace stratevo
