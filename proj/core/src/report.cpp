#include "stratevo/report.hpp"

#include <fstream>
#include <sstream>

#include "stratevo/archive.hpp"
#include "stratevo/engine.hpp"
#include "stratevo/error.hpp"
#include "stratevo/run_store.hpp"
#include "stratevo/strategy_space.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

RunReport build_report(const std::filesystem::path& run_dir) {
  const RunPaths paths{run_dir};
  const RunHeader header = read_header(paths);
  for (const auto& p : {paths.archive_log(), paths.trajectory(), paths.checkpoints()}) {
    if (!std::filesystem::exists(p)) throw Error("missing log " + p.string());
  }
  const auto last = read_last_checkpoint(paths);
  if (!last) throw Error(run_dir.string() + " has no committed generation yet");
  const Checkpoint& cp = last->checkpoint;

  RunReport r;
  r.task_id = header.config.task.id;
  r.total_generations = header.config.total_generations;
  r.generations_done = cp.generation;
  r.partial = !std::filesystem::exists(paths.summary()) || cp.generation < header.config.total_generations;
  r.best_fitness = cp.best_so_far;
  r.total_cost_usd = cp.cumulative_cost_usd;
  r.reference = make_task(header.config.task)->reference_value();
  r.trajectory_csv = std::filesystem::absolute(paths.trajectory());

  {
    std::ifstream in(paths.archive_log(), std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      r.seed_fitness = from_record(line).fitness;
      break;
    }
  }

  r.generations_to_best = 0;
  bool found = r.seed_fitness == r.best_fitness;
  for (const TrajectoryRecord& row : read_trajectory(paths.trajectory())) {
    if (row.generation > cp.generation) break;
    switch (row.route) {
      case Route::base: ++r.base_generations; break;
      case Route::strategy: ++r.strategy_generations; break;
      case Route::skipped: ++r.skipped_generations; break;
    }
    if (!found && row.best_so_far == r.best_fitness) {
      r.generations_to_best = row.generation;
      found = true;
    }
  }
  return r;
}

std::string format_report(const RunReport& r) {
  std::ostringstream out;
  out << "task: " << r.task_id << '\n';
  out << "status: " << (r.partial ? "partial" : "complete") << " (" << r.generations_done << "/"
      << r.total_generations << " generations)\n";
  out << "best fitness: " << format_number(r.best_fitness);
  if (r.reference) {
    out << " (reference " << format_number(*r.reference) << ", " << format_number(100.0 * r.best_fitness / *r.reference)
        << "% of reference)";
  }
  out << '\n';
  out << "seed fitness: " << format_number(r.seed_fitness) << '\n';
  out << "generations to best: " << r.generations_to_best << '\n';
  out << "routes: base " << r.base_generations << ", strategy " << r.strategy_generations << ", skipped "
      << r.skipped_generations << '\n';
  out << "total cost (USD): " << format_number(r.total_cost_usd) << '\n';
  out << "trajectory: " << r.trajectory_csv.string() << '\n';
  return out.str();
}

std::size_t export_embeddings(const std::filesystem::path& run_dir, const std::filesystem::path& out_csv) {
  const RunPaths paths{run_dir};
  const RunHeader header = read_header(paths);
  ArchiveLimits limits;
  limits.capacity = header.config.capacity;
  limits.embedding_dim = header.config.providers.embedding_dim;
  limits.behavior_length = make_task(header.config.task)->instance_count();
  const Archive archive = load_run(paths.archive_log(), limits);
  const ClusterState clusters = cluster_archive(archive, header.config.clusters, header.config.seed);

  std::ofstream out(out_csv, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + out_csv.string());
  out << "id,generation,fitness,cluster";
  for (std::size_t i = 0; i < limits.embedding_dim; ++i) out << ",e_" << i;
  out << '\n';
  for (const ArchiveEntry& e : archive.entries()) {
    out << e.id << ',' << e.generation << ',' << format_number(e.fitness) << ',' << clusters.assignments.at(e.id);
    for (double x : e.strategy_embedding) out << ',' << format_number(x);
    out << '\n';
  }
  if (!out) throw Error("write to " + out_csv.string() + " failed");
  return archive.size();
}

}  // namespace stratevo
