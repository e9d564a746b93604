#pragma once

#include <cstdint>
#include <random>

#include "esw/signal.hpp"

namespace esw {

// Reproducible random source. The sequence is fully specified so that any
// implementation can regenerate it:
//   * raw bits: std::mt19937_64 seeded with the 64-bit seed (the standard
//     fixes its output sequence exactly);
//   * uniform(): (bits >> 11) * 2^-53, in [0, 1);
//   * gaussian(): Box-Muller on u1 = 1 - uniform(), u2 = uniform(), emitting
//     sqrt(-2 ln u1) cos(2 pi u2) and then the cached sin() partner;
//   * uniform_int(lo, hi): rejection sampling of bits modulo (hi - lo + 1).
// std::*_distribution is avoided because its output differs between
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// N(0, sigma^2) white noise of the given length.
Signal white_noise(std::size_t length, double sigma, std::uint64_t seed, int sample_rate = 48000);

}  // namespace esw
