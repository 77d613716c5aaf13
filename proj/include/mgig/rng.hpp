#pragma once

#include <cstdint>
#include <random>

namespace mgig {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seeded random stream. `stream(i)` derives an independent child stream from
/// (seed, i) without touching this stream's draw state, so work items can be
/// assigned their own stream by index and results stay identical no matter how
/// many workers process them.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  SeededRng stream(std::uint64_t index) const {
    return SeededRng(splitmix64(seed_ ^ splitmix64(index + 0x51ED2701ull)));
  }

  double normal() { return std::normal_distribution<double>()(engine_); }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  /// Chi-squared with real dof > 0, realized as gamma(dof/2, 2).
  double chi_squared(double dof) { return gamma(dof / 2.0, 2.0); }

  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mgig
