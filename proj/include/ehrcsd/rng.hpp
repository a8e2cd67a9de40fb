#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ehrcsd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the independent stream `index` under a master `seed`.
///
/// Every parallel unit of work (a patient in the generator, an iteration in
/// the bootstrap) draws from its own stream, so results do not depend on the
/// thread schedule:  derive_seed(seed, i) = splitmix64(seed ^ splitmix64(i + 1)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

/// mt19937_64 with portable helpers. The standard library distributions are
/// implementation-defined, so draws are built directly from engine output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n), unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t index(std::uint64_t n) {
    auto m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
  std::mt19937_64 engine_;
};

} // namespace ehrcsd
