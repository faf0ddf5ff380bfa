#pragma once
#include <cmath>
#include <cstdint>

namespace popcast {

// Deterministic PRNG used everywhere randomness matters. A hand-rolled
// splitmix64 keeps sequences identical across platforms and standard
// libraries, which std::shuffle / std::uniform_*_distribution do not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n), modulo bias removed by rejection
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  // Box-Muller, cosine branch only so one call consumes exactly two draws
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692528676655900577 * u2);
  }

  // Independent deterministic substream, e.g. one per parallel worker.
  Rng fork(std::uint64_t a, std::uint64_t b = 0) const {
    Rng r(state_ ^ (0x9e3779b97f4a7c15ull + a * 0xc2b2ae3d27d4eb4full +
                    b * 0x165667b19e3779f9ull));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace popcast
