#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "constyle/common.hpp"

namespace constyle {

// Stateless 64-bit mixer. Used for seeding and for deriving child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// child_seed(s, i) is order-independent: it only depends on the parent seed
// and the index, never on how much of the parent stream was consumed.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// Deterministic, seedable generator. All distributions are implemented here
// rather than taken from <random> so that sequences are identical across
// standard libraries and stable under replay.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }
  Rng child(std::uint64_t index) const { return Rng(child_seed(seed_, index)); }

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw ValueError("uniform_int: hi < lo");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes exactly two uniforms per call and keeps no cache,
  // so the stream position is predictable for replay.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::int64_t poisson(double lambda);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace constyle
