#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace carryover {

// Deterministic random source. All randomness in the project flows through
// one of these; distributions are hand-rolled so results are stable across
// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Derive an independent stream, e.g. one per training epoch.
  Rng fork(std::uint64_t salt) {
    std::uint64_t mixed = engine_() ^ (salt * 0x9e3779b97f4a7c15ULL);
    return Rng(mixed);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace carryover
