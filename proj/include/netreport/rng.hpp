#pragma once

// Seedable randomness for every stochastic component.
//
// All draws go through Rng, which wraps std::mt19937_64 but implements its
// own uniform/bernoulli/integer mappings so that a (seed, algorithm) pair
// pins the output stream exactly, independent of the standard library's
// unspecified distribution internals.  Sub-streams (one per respondent,
// bootstrap replicate, sweep cell, ...) are derived with a single splitmix64
// finalizer step, so replicate k's stream is a pure function of
// (parent seed, k) and any evaluation order yields identical results.

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace netreport {

// Recorded in run metadata so outputs can be reproduced bit-for-bit.
inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-derive";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream seed for sub-unit `index` of a parent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  // Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // k distinct indices drawn without replacement from [0, n), selection order.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                        std::uint32_t k) {
    if (k > n) {
      throw std::invalid_argument(
          "sample_without_replacement: k exceeds population size");
    }
    std::vector<std::uint32_t> pool(n);
    for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::uint32_t> out;
    out.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
      const std::uint64_t j = i + below(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netreport
