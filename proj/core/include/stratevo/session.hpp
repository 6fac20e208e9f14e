#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "stratevo/config.hpp"
#include "stratevo/engine.hpp"
#include "stratevo/providers.hpp"
#include "stratevo/tasks.hpp"

namespace stratevo {

/// Everything a run needs besides its config, built from the config.
struct Session {
  std::unique_ptr<Task> task;
  std::shared_ptr<UsageLedger> ledger;
  std::unique_ptr<ChatProvider> chat;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<CandidateExecutor> executor;
  EngineOptions options;
};

/// Throws ConfigError for settings that cannot be realised (missing scenario
/// file, unreadable seed program).
Session make_session(const RunConfig& config);

/// Starts a run in `run_dir`, refusing directories that already hold one.
RunResult start_run(const RunConfig& config, const std::filesystem::path& run_dir,
                    std::optional<int> halt_after = std::nullopt);

/// Continues the run in `run_dir` using the config stored in its header.
/// When `expected` is given its hash must match the header's.
RunResult resume_run(const std::filesystem::path& run_dir, const RunConfig* expected = nullptr,
                     std::optional<int> halt_after = std::nullopt);

}  // namespace stratevo
