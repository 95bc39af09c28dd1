#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "supercm/scalar.hpp"

namespace supercm {

namespace detail {

// splitmix64 finalizer; full avalanche, used to derive child seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Seedable, splittable generator. All stochastic operations in the library
// take one of these explicitly; splitting derives an independent child stream
// from (seed, stream id) without touching the parent's state, so run layouts
// stay reproducible regardless of draw order elsewhere.
//
// The engine is std::mt19937_64 (fully specified by the standard) and the
// uniform/normal transforms below are hand-rolled, so sequences are
// bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : seed_(seed), engine_(detail::mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  real uniform() {
    return static_cast<real>((engine_() >> 11) * 0x1.0p-53);
  }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cosine branch only; the discarded sine
  // half keeps the draw count per call fixed at two uniforms).
  real normal() {
    const real u1 = static_cast<real>(1.0) - uniform();  // (0, 1]
    const real u2 = uniform();
    const real r = std::sqrt(static_cast<real>(-2.0) * std::log(u1));
    return r * std::cos(static_cast<real>(2.0 * 3.14159265358979323846) * u2);
  }

  // Index in [0, n). Modulo bias is ~n/2^64, irrelevant at this scale.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const {
    return Rng(detail::mix64(seed_ ^ detail::mix64(stream)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace supercm
