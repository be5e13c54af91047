#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "foldnorm/numerics.hpp"

// Deterministic randomness. All sampling in the library draws its uniforms
// directly from mt19937_64 output (the engine is fully specified by the
// standard), so identical seeds give identical streams on every platform.
// Substreams are derived by hashing a (seed, path...) tuple with splitmix64.

namespace foldnorm::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a master seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = seed ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : path) {
    state ^= p * 0x2545F4914F6CDD1DULL;
    out = splitmix64(state);
  }
  return out;
}

/// Uniform draw in (0, 1], 53-bit resolution.
inline double uniform01(std::mt19937_64& eng) {
  return ((eng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform index in [0, n) via the multiply-shift bound trick.
inline std::uint64_t uniform_index(std::mt19937_64& eng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(eng()) * n) >> 64);
}

/// Standard normal draws via Box-Muller over explicit uniforms.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01(eng_);
    const double u2 = uniform01(eng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace foldnorm::rng
