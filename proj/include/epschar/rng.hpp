#pragma once
// Deterministic pseudo-random numbers (splitmix64).

#include <cstdint>

namespace epschar {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() noexcept {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, m), by rejection.
  int uniform(int m) noexcept {
    const uint64_t um = static_cast<uint64_t>(m);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % um;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return static_cast<int>(v % um);
  }

  /// Independent stream derived from this one.
  SplitMix64 fork(uint64_t salt) noexcept { return SplitMix64(next() ^ (salt * 0xD1B54A32D192ED03ULL)); }

 private:
  uint64_t state_;
};

}  // namespace epschar
