#pragma once

// Deterministic random streams. Every stochastic component derives its own
// stream from a root seed through mix64/derive_seed, and all distributions are
// built from the raw mt19937_64 output rather than std::*_distribution, whose
// algorithms are implementation-defined. Identical (seed, config) therefore
// reproduces identical draws on any platform.

#include <cmath>
#include <cstdint>
#include <random>

namespace privnet {

// splitmix64 finalizer
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
  return mix64(mix64(root) ^ (0x517cc1b727220a95ULL * stream + 1));
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream, uint64_t a, uint64_t b) {
  return mix64(derive_seed(root, stream) ^ mix64(a * 0x2545f4914f6cdd1dULL + b));
}

// Stream identifiers. Data, sampling, and noise use disjoint streams so that
// paired runs (sensitivity, scheme coupling) share exactly the randomness
// they are meant to share.
inline constexpr uint64_t kStreamData = 1;
inline constexpr uint64_t kStreamSampling = 2;
inline constexpr uint64_t kStreamNoise = 3;
inline constexpr uint64_t kStreamKeys = 4;

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform01_open_low() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  uint64_t uniform_index(uint64_t n) {
    // Rejection-free modulo is biased for huge n; dataset sizes are tiny, and
    // determinism matters more here than the 2^-64 bias.
    return gen_() % n;
  }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential() { return -std::log(uniform01_open_low()); }

  // Gamma(2,1) as the sum of two unit exponentials.
  double gamma21() { return exponential() + exponential(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace privnet
