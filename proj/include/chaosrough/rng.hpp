#pragma once
// Counter-based splittable random numbers. Each Monte Carlo sample derives its
// own child stream from (seed, sample index), so sample i is reproducible in
// isolation and results do not depend on how work is split across threads.

#include <cstdint>
#include <vector>

namespace chaosrough {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc908ull)), counter_(0) {}

  // Independent substream addressed by index; derived from the base key only,
  // never from the current counter, so children are position-independent.
  Rng child(std::uint64_t index) const {
    return Rng(key_ ^ mix64(0xd1b54a32d192ed03ull ^ (index + 1)), 0);
  }

  std::uint64_t next_u64() { return mix64(key_ ^ (0x9e3779b97f4a7c15ull * ++counter_)); }

  // Uniform on (0,1]; never returns 0 so log() below is safe.
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller (cosine branch only: deterministic call
  // sequence, no cached state).
  double normal();

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace chaosrough

#include <cmath>

namespace chaosrough {

inline double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace chaosrough
