#include "stratevo/session.hpp"

#include "stratevo/error.hpp"
#include "stratevo/run_store.hpp"

namespace stratevo {

Session make_session(const RunConfig& config) {
  validate(config);
  Session s;
  s.task = make_task(config.task);
  s.ledger = std::make_shared<UsageLedger>();
  const PriceTable prices(config.providers.prices);

  if (config.providers.kind == ProviderConfig::Kind::mock) {
    Scenario scenario;
    if (config.providers.scenario_path) {
      try {
        scenario = Scenario::load(*config.providers.scenario_path);
      } catch (const std::exception& e) {
        throw ConfigError("provider.scenario", e.what());
      }
    } else {
      scenario.echo = true;
    }
    s.chat = std::make_unique<MockChat>(std::move(scenario), prices, s.ledger);
    s.embedder = std::make_unique<HashEmbedder>(config.providers.embedding_dim, config.providers.embedding_seed,
                                                prices, s.ledger);
  } else {
    s.chat = std::make_unique<OpenAiChat>(config.providers.chat, prices, s.ledger);
    s.embedder = std::make_unique<OpenAiEmbedding>(config.providers.embedding, config.providers.embedding_dim,
                                                   prices, s.ledger);
  }

  if (config.executor.kind == ExecutorConfig::Kind::literal) {
    s.executor = std::make_unique<LiteralExecutor>();
  } else {
    s.executor = std::make_unique<SubprocessExecutor>(config.executor.command, config.executor.candidate_file);
  }

  if (config.seed_program_path) {
    try {
      s.options.seed_program = read_file(*config.seed_program_path);
    } catch (const std::exception& e) {
      throw ConfigError("seed_program", e.what());
    }
  }
  return s;
}

RunResult start_run(const RunConfig& config, const std::filesystem::path& run_dir, std::optional<int> halt_after) {
  Session s = make_session(config);
  s.options.halt_after = halt_after;
  Engine engine(config, *s.task, *s.chat, *s.embedder, *s.executor, s.options);
  return engine.run(run_dir);
}

RunResult resume_run(const std::filesystem::path& run_dir, const RunConfig* expected, std::optional<int> halt_after) {
  const RunHeader header = read_header(RunPaths{run_dir});
  if (expected != nullptr && config_hash(*expected) != header.config_hash) {
    throw Error("config hash " + config_hash(*expected) + " does not match the run's " + header.config_hash);
  }
  Session s = make_session(header.config);
  s.options.halt_after = halt_after;
  Engine engine(header.config, *s.task, *s.chat, *s.embedder, *s.executor, s.options);
  return engine.resume(run_dir);
}

}  // namespace stratevo
