#pragma once

// Deterministic random number generation.
//
// The generator is xoshiro256++ seeded through SplitMix64, so a (seed, stream)
// pair fully determines the random sequence on every platform: no
// std::random_device, no distribution objects from <random> (their output is
// implementation-defined). Gaussians come from a plain Box-Muller transform
// with the spare value cached, which keeps sample streams reproducible
// bit-for-bit across compilers and easy to replicate in other languages.
//
// Stream split rule: chain i of a run with base seed s uses Rng(s, i). The
// stream index is folded into the SplitMix64 state before warmup, so streams
// with the same base seed are decorrelated but individually reproducible.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace polysamp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed;
    // Fold the stream index in with an odd constant so (seed, 0) and
    // (seed+1, 0) never collide with (seed, 1).
    sm ^= 0xd1342543de82ef95ULL * (stream + 1);
    for (auto& word : state_) word = detail::splitmix64(sm);
    // xoshiro256++ must not start from the all-zero state.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform on (0,1): 53 random bits, then offset by half an ulp so 0 is
  // excluded (log() below must never see 0).
  double uniform() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace polysamp
