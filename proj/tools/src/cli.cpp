#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "stratevo/config.hpp"
#include "stratevo/error.hpp"
#include "stratevo/report.hpp"
#include "stratevo/run_store.hpp"
#include "stratevo/session.hpp"
#include "stratevo/templates.hpp"

namespace stratevo::cli {
namespace {

void print_result(const RunResult& r, const std::filesystem::path& dir, std::ostream& out) {
  out << (r.completed ? "run complete" : "run stopped") << ": " << r.trajectory.size() << " generations, best "
      << format_number(r.best.fitness) << " (id " << r.best.id << ", generation " << r.best.generation
      << "), cost $" << format_number(r.totals.cost_usd) << '\n';
  out << "run directory: " << dir.string() << '\n';
}

void write_report_csv(const RunReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "task,status,generations_done,total_generations,seed_fitness,best_fitness,reference,"
         "generations_to_best,total_cost_usd,base,strategy,skipped,trajectory\n";
  out << r.task_id << ',' << (r.partial ? "partial" : "complete") << ',' << r.generations_done << ','
      << r.total_generations << ',' << format_number(r.seed_fitness) << ',' << format_number(r.best_fitness) << ','
      << (r.reference ? format_number(*r.reference) : "") << ',' << r.generations_to_best << ','
      << format_number(r.total_cost_usd) << ',' << r.base_generations << ',' << r.strategy_generations << ','
      << r.skipped_generations << ',' << r.trajectory_csv.string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Strategy-aware evolutionary program search", "stratevo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stratevo 0.1.0");

  std::string config_path, run_dir, out_path;

  auto* run_cmd = app.add_subcommand("run", "Start a new run from a config file");
  run_cmd->add_option("--config", config_path, "Run config (JSON)")->required();
  run_cmd->add_option("--run-dir", run_dir, "Run directory (defaults to output_dir from the config)");

  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  resume_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  resume_cmd->add_option("--config", config_path, "Refuse unless this config matches the run's");

  auto* report_cmd = app.add_subcommand("report", "Summarize a run");
  report_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  report_cmd->add_option("--out", out_path, "Also write the summary as CSV");

  auto* export_cmd = app.add_subcommand("export-embeddings", "Write strategy embeddings with cluster labels");
  export_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  export_cmd->add_option("--out", out_path, "Output CSV")->required();

  auto* validate_cmd = app.add_subcommand("validate-config", "Check a config and print it with defaults applied");
  validate_cmd->add_option("--config", config_path, "Run config (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*validate_cmd) {
      const RunConfig config = load_config(config_path);
      out << config_to_json(config, 2) << '\n';
      out << "config_hash: " << config_hash(config) << '\n';
      return kOk;
    }
    if (*run_cmd) {
      const RunConfig config = load_config(config_path);
      std::filesystem::path dir = run_dir;
      if (dir.empty()) {
        if (!config.output_dir) throw ConfigError("output_dir", "no run directory given (use --run-dir)");
        dir = *config.output_dir;
      }
      if (std::filesystem::exists(RunPaths{dir}.header())) {
        err << "error: " << dir.string() << " already holds a run; use 'resume' or choose another directory\n";
        return kFailure;
      }
      print_result(start_run(config, dir), dir, out);
      return kOk;
    }
    if (*resume_cmd) {
      const RunPaths paths{run_dir};
      std::optional<RunConfig> expected;
      if (!config_path.empty()) expected = load_config(config_path);
      const RunHeader header = read_header(paths);
      if (expected && config_hash(*expected) != header.config_hash) {
        err << "error: config hash " << config_hash(*expected) << " does not match the run's "
            << header.config_hash << "\n";
        return kFailure;
      }
      if (std::filesystem::exists(paths.summary())) {
        out << "run in " << run_dir << " is already complete; nothing to do\n";
        return kOk;
      }
      print_result(resume_run(run_dir, expected ? &*expected : nullptr), run_dir, out);
      return kOk;
    }
    if (*report_cmd) {
      const RunReport report = build_report(run_dir);
      out << format_report(report);
      if (!out_path.empty()) write_report_csv(report, out_path);
      return kOk;
    }
    if (*export_cmd) {
      const std::size_t rows = export_embeddings(run_dir, out_path);
      out << "wrote " << rows << " rows to " << out_path << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const ProviderExhausted& e) {
    err << "provider exhausted: " << e.what() << "\nthe run can be continued with 'stratevo resume'\n";
    return kInterrupted;
  } catch (const LogError& e) {
    err << "log error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kBadConfig;
}

}  // namespace stratevo::cli
