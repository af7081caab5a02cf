#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fapprox {

// Splittable counter-free PRNG: xoshiro256++ seeded through SplitMix64.
// Streams derived from (seed, purpose, index) are independent regardless of
// the order in which they are created or consumed, so per-trial data, noise
// and network initialization never perturb one another.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Child stream keyed by a purpose tag and an index (e.g. trial number).
  RngStream derive(std::string_view purpose, std::uint64_t index = 0) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (char c : purpose) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ull;
    RngStream child(0);
    std::uint64_t x = h;
    for (std::size_t i = 0; i < 4; ++i) {
      std::uint64_t mix = state_[i] ^ (index + 0x632be59bd9b4e019ull * (i + 1));
      x ^= splitmix64(mix);
      child.state_[i] = splitmix64(x);
    }
    return child;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (lo, hi); endpoint draws are rejected.
  double uniform_open(double lo, double hi) {
    for (;;) {
      double u = lo + (hi - lo) * uniform01();
      if (u > lo && u < hi) return u;
    }
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4] = {};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace fapprox
