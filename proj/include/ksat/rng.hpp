// Seedable, portable PRNG used everywhere randomness must be reproducible
// across platforms and standard libraries. The generator is SplitMix64
// (Steele, Lea & Flood 2014); bounded draws use threshold rejection and
// unit doubles take the top 53 bits. The exact draw procedures are part of
// the instance-set reproducibility contract, see README.
#pragma once

#include <cstdint>

namespace ksat {

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound), bound > 0. Rejects the biased low range.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return next() >> 63; }

private:
  std::uint64_t state_;
};

}  // namespace ksat
