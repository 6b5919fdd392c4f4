#pragma once

#include "pac/types.hpp"

#include <cmath>
#include <cstdint>

namespace pac {

/// Counter-based pseudorandom generator (splitmix64).
///
/// Output n of a stream is mix64(seed + (n+1)*gamma), so any draw can be
/// reproduced from (seed, n) alone. Streams are split by the documented rule
/// seed_r = master ^ r; the mixing function decorrelates nearby keys.
/// Statistical quality is secondary here; byte-level reproducibility of every
/// run is the contract.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  static CounterRng stream(std::uint64_t master, std::uint64_t stream_id) {
    return CounterRng(master ^ stream_id);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  Index uniform_index(Index n) { return static_cast<Index>(next_double() * static_cast<double>(n)); }

  /// Uniform draw from the probability simplex via normalized exponential spacings.
  RowVector simplex_row(int n) {
    RowVector e(n);
    for (int j = 0; j < n; ++j) e(j) = -std::log(1.0 - next_double());
    return e / e.sum();
  }

 private:
  std::uint64_t state_;
};

}  // namespace pac
