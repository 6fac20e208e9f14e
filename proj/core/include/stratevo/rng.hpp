#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace stratevo {

/// Seeded random stream shared by every stochastic decision in a run.
///
/// Conversions to doubles and bounded integers are done here rather than with
/// the <random> distributions so the stream is identical across standard
/// libraries. Every call consumes whole 64-bit words from the engine and the
/// number consumed is tracked, which lets a resumed run fast-forward to the
/// exact position it stopped at.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Requires n >= 1. Rejection sampling, so the
  /// number of words consumed varies.
  std::size_t index(std::size_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

  /// Reset to `seed` and skip `draws` words.
  void restore(std::uint64_t seed, std::uint64_t draws);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace stratevo
