#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ksd {

// splitmix64 finalizer. Bijective on 64-bit words with full avalanche.
[[nodiscard]] inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream seed for cell (a, b) under a base seed: mix64 applied after folding
// in each coordinate. Gives every (sample size, replication) pair its own
// stream, so results do not depend on evaluation order or thread count.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(mix64(base) ^ a) ^ b);
}

// Deterministic random stream. The engine is std::mt19937_64, which the
// standard pins bit-for-bit; the variate transforms live here because the
// standard library distributions are not reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on (0, 1]: 53-bit resolution, never 0, so log(uniform01()) is safe.
  [[nodiscard]] double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller transform. Pairs are generated and the
  // spare is cached.
  [[nodiscard]] double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double a = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased integer in [0, n) by rejection. pre: n >= 1.
  [[nodiscard]] std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  [[nodiscard]] std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ksd
