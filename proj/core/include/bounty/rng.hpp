#pragma once

#include <cstdint>
#include <random>

namespace bounty {

// Deterministic random source used everywhere a seed appears (splits,
// synthetic tasks, fuzzing). The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard. The distributions below are
// implemented here rather than taken from <random>, whose distribution
// algorithms differ between standard libraries, so that a seed yields the
// same bits on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the Box-Muller transform (one value per call).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bounty
