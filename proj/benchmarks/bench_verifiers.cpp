#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stratevo/tasks.hpp"

namespace {

using namespace stratevo;

Placement grid(std::size_t side) {
  Placement p;
  const double r = 0.5 / static_cast<double>(side);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) p.circles.push_back({r * (2 * i + 1), r * (2 * j + 1), r});
  }
  return p;
}

void BM_SquarePacking(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Placement p = grid(side);
  for (auto _ : state) benchmark::DoNotOptimize(verify_square_packing(p, side * side));
}
BENCHMARK(BM_SquarePacking)->Arg(4)->Arg(6)->Arg(16);

void BM_Minmax(benchmark::State& state) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(gen), u(gen)};
  for (auto _ : state) benchmark::DoNotOptimize(verify_minmax(pts, pts.size()));
}
BENCHMARK(BM_Minmax)->Arg(16)->Arg(128);

}  // namespace
