#include "esw/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace esw {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  require(lo <= hi, "empty integer range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<std::int64_t>(x % span);
}

Signal white_noise(std::size_t length, double sigma, std::uint64_t seed, int sample_rate) {
  require(length >= 1, "noise length must be positive");
  require(sigma >= 0.0 && std::isfinite(sigma), "noise sigma must be non-negative");
  Rng rng(seed);
  std::vector<double> out(length);
  for (double& v : out) v = sigma * rng.gaussian();
  return Signal(std::move(out), sample_rate);
}

}  // namespace esw
