#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "stratevo/archive.hpp"
#include "stratevo/rng.hpp"
#include "stratevo/strategy_space.hpp"

namespace {

using namespace stratevo;

std::vector<double> random_unit(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> nd;
  std::vector<double> v(dim);
  double n = 0.0;
  for (auto& x : v) {
    x = nd(gen);
    n += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n);
  return v;
}

Archive filled_archive(std::size_t n, std::size_t dim, std::size_t behavior_len) {
  std::mt19937_64 gen(1);
  Archive a({n, dim, behavior_len});
  for (std::size_t i = 1; i <= n; ++i) {
    ArchiveEntry e;
    e.id = i;
    e.generation = static_cast<int>(i);
    e.program_source = "x";
    e.strategy_description = "strategy";
    e.fitness = static_cast<double>(gen() % 1000) / 1000.0;
    e.strategy_embedding = random_unit(gen, dim);
    e.behavior_vector = BehaviorVector(behavior_len);
    for (auto& b : *e.behavior_vector) b = gen() & 1;
    e.produced_by = i == 1 ? ProducedBy::seed : ProducedBy::strategy_pipeline;
    if (i != 1) e.parent_id = 1;
    a.insert(e);
  }
  return a;
}

void BM_BehavioralScore(benchmark::State& state) {
  std::mt19937_64 gen(2);
  std::vector<std::uint8_t> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& x : a) x = gen() & 1;
  for (auto& x : b) x = gen() & 1;
  for (auto _ : state) benchmark::DoNotOptimize(behavioral_score(a, b));
}
BENCHMARK(BM_BehavioralScore)->Arg(32)->Arg(64)->Arg(1024);

void BM_Cluster(benchmark::State& state) {
  const auto archive = filled_archive(static_cast<std::size_t>(state.range(0)), 256, 32);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cluster_archive(archive, 5, seed++));
}
BENCHMARK(BM_Cluster)->Arg(50)->Arg(200)->Arg(1000);

void BM_SelectInspirations(benchmark::State& state) {
  const auto archive = filled_archive(static_cast<std::size_t>(state.range(0)), 256, 32);
  const ClusterState clusters = cluster_archive(archive, 5, 3);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(select_inspirations(archive, 2, 50, 10, &clusters, rng));
}
BENCHMARK(BM_SelectInspirations)->Arg(50)->Arg(200)->Arg(1000);

}  // namespace
