/**
 * @file rng.hpp
 * @brief Seeded counter-derivable random number generator.
 *
 * All randomness in the simulator flows through this generator so that any
 * run is reproducible from a single 64-bit seed. Substreams are derived by
 * hashing (seed, stream id, counters...), which makes frame generation
 * order-independent and safe to parallelize.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace gfscma {

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Hash a word list into one 64-bit substream seed.
inline uint64_t derive_seed(std::initializer_list<uint64_t> words) {
  uint64_t s = 0x243F6A8885A308D3ull;
  for (uint64_t w : words) {
    s = mix64(s ^ (w + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2)));
  }
  return s;
}

/// Named substreams; keeps independent random uses decoupled.
enum Stream : uint64_t {
  kStreamActivity = 1,
  kStreamBits = 2,
  kStreamSnr = 3,
  kStreamNoisePreamble = 4,
  kStreamNoiseData = 5,
  kStreamDropout = 6,
  kStreamInitPgn = 7,
  kStreamInitUaen = 8,
  kStreamInitAudn = 9,
};

/**
 * SplitMix64 sequence generator with owned distributions (uniform,
 * Gaussian, Bernoulli). Distribution code is deliberately self-contained:
 * std:: distributions are implementation-defined and would break
 * bit-reproducibility across standard libraries.
 */
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  static Rng derive(uint64_t seed, uint64_t stream, uint64_t c0 = 0, uint64_t c1 = 0) {
    return Rng(derive_seed({seed, stream, c0, c1}));
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Standard normal via Box-Muller; caches the paired deviate.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gfscma
