#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include "stratevo/config.hpp"
#include "stratevo/session.hpp"

namespace {

using namespace stratevo;

// Whole mock runs: provider and executor overhead are negligible, so this
// measures the loop, selection, clustering and log writes.
void BM_MockRun(benchmark::State& state) {
  RunConfig config;
  config.task.id = "integer_sequences";
  config.total_generations = static_cast<int>(state.range(0));
  config.providers.kind = ProviderConfig::Kind::mock;
  config.providers.embedding_dim = 64;
  config.executor.kind = ExecutorConfig::Kind::literal;
  const auto root = std::filesystem::temp_directory_path() / "stratevo-bench";
  int i = 0;
  for (auto _ : state) {
    const auto dir = root / std::to_string(i++);
    benchmark::DoNotOptimize(start_run(config, dir));
    state.PauseTiming();
    std::filesystem::remove_all(dir);
    state.ResumeTiming();
  }
  std::filesystem::remove_all(root);
}
BENCHMARK(BM_MockRun)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
