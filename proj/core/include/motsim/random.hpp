#pragma once

#include <cmath>
#include <cstdint>

// Counter-based randomness. Every draw is a pure function of a key, so two
// pipeline runs that look at the same (seed, frame, object) see the same
// value no matter which policy is driving them or in which order frames are
// processed. This is what makes policy-equivalence checks exact.

namespace motsim::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Key {
  std::uint64_t seed = 0;
  std::uint64_t frame = 0;
  std::uint64_t object = 0;
  std::uint64_t stream = 0;

  [[nodiscard]] std::uint64_t state() const {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ frame);
    h = splitmix64(h ^ object);
    h = splitmix64(h ^ stream);
    return h;
  }

  [[nodiscard]] Key with_stream(std::uint64_t s) const {
    return Key{seed, frame, object, s};
  }
};

// Uniform in [0, 1), 53 mantissa bits.
inline double uniform(const Key& key) {
  return static_cast<double>(key.state() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; the second uniform comes from one extra
// splitmix round so a single key yields one independent gaussian.
inline double gaussian(const Key& key) {
  const std::uint64_t s = key.state();
  double u1 = static_cast<double>(s >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

// Knuth inversion; fine for the small rates used here (clutter per frame).
inline int poisson(const Key& key, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  double p = 1.0;
  int k = 0;
  while (true) {
    p *= uniform(key.with_stream(key.stream + static_cast<std::uint64_t>(k)));
    if (p <= limit) return k;
    ++k;
  }
}

}  // namespace motsim::rng
