#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "amc/types.hpp"

namespace amc {

// SplitMix64 finalizer; whitens user seeds and derives per-worker streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream seed for work unit `index` under a master seed.
// Results never depend on which worker consumes which index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

// Seeded random source. Variate shaping is done here instead of through
// std:: distributions so that streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n); unbiased via rejection.
  std::size_t index(std::size_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % static_cast<std::uint64_t>(n);
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return static_cast<std::size_t>(v % static_cast<std::uint64_t>(n));
  }

  // Circularly symmetric complex Gaussian with E|z|^2 = 1.
  cxd complex_normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double th = 2.0 * kPi * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace amc
