#include "stratevo/rng.hpp"

#include <limits>

namespace stratevo {

std::size_t Rng::index(std::size_t n) {
  if (n <= 1) {
    return 0;
  }
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return static_cast<std::size_t>(x % bound);
}

void Rng::restore(std::uint64_t seed, std::uint64_t draws) {
  seed_ = seed;
  engine_.seed(seed);
  engine_.discard(draws);
  draws_ = draws;
}

}  // namespace stratevo
