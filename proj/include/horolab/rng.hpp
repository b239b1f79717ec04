#pragma once

#include <cstdint>

namespace horolab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic counter-free generator (xoshiro256**), seeded via splitmix64.
/// Uniform doubles are produced bit-identically on every platform, which the
/// reproducibility contract of the experiment outputs relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  /// Independent stream derived from a master seed and task indices.
  static Rng stream(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
    std::uint64_t sm = master;
    std::uint64_t h = detail::splitmix64(sm);
    sm ^= tag * 0x9e3779b97f4a7c15ULL + h;
    h = detail::splitmix64(sm);
    sm ^= index * 0xd1b54a32d192ed03ULL + h;
    return Rng(detail::splitmix64(sm));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace horolab
