#pragma once

#include <cstdint>

namespace pcm {

// SplitMix64 finalizer; statistically solid and cheap enough to call per pair.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based coin for pair k of a graph keyed by seed.  The value depends
// only on (seed, k), so sampling is reproducible under any evaluation order.
inline bool pair_coin(std::uint64_t seed, std::uint64_t k) {
  return (splitmix64(seed ^ splitmix64(k + 0xD1B54A32D192ED03ULL)) >> 63) != 0;
}

// Small deterministic stream for test helpers (permutations, dense noise).
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return (next() >> 11) * 0x1.0p-53; }

  // uniform in [0, m)
  std::uint64_t next_below(std::uint64_t m) { return next() % m; }

  // standard normal via Box-Muller
  double next_gauss();

 private:
  std::uint64_t state_;
};

inline double SplitMixStream::next_gauss() {
  double u1 = 0.0;
  while (u1 <= 1e-300) u1 = next_double();
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace pcm
