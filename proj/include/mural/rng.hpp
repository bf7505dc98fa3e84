#pragma once
// Deterministic randomness.  Every sampling site derives its own stream
// from the 64-bit run seed plus a (phase, group) tag, so a run reproduces
// bit-for-bit no matter how cells are scheduled, and per-group work can be
// reordered or parallelised without perturbing anything else.
//
// Draw primitives are hand-specified on top of mt19937_64 (53-bit uniforms,
// inverse-CDF point draws) instead of std::*_distribution so the byte
// stream of a run does not depend on the standard library in use.

#include <cassert>
#include <cstdint>
#include <random>

namespace mural {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable stream key: run seed folded with the phase and group tags through
// two avalanche rounds.  Distinct tags give statistically independent
// streams; equal tags give identical streams.
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t phase,
                                 std::uint64_t group) {
  std::uint64_t state = run_seed;
  state ^= splitmix64(state) + 0x632be59bd9b4e019ull * (phase + 1);
  state ^= splitmix64(state) + 0x9e3779b97f4a7c15ull * (group + 1);
  return splitmix64(state);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    assert(p >= 0.0 && p <= 1.0);
    return uniform01() < p;
  }

  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    assert(n > 0);
    // Rejection sampling over the smallest covering power of two keeps the
    // draw exactly uniform.
    if (n == 1) return 0;
    std::uint64_t mask = ~std::uint64_t(0) >> __builtin_clzll(n - 1);
    for (;;) {
      std::uint64_t v = gen_() & mask;
      if (v < n) return static_cast<std::size_t>(v);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mural
