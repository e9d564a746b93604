#include "esw/signal.hpp"

#include <algorithm>
#include <cmath>

namespace esw {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Signal::Signal(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  require(sample_rate_ > 0, "sample rate must be positive");
  require(!samples_.empty(), "signal must hold at least one sample");
  require(std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); }),
          "signal contains non-finite samples");
}

Signal Signal::zeros(std::size_t length, int sample_rate) {
  return Signal(std::vector<double>(length, 0.0), sample_rate);
}

double Signal::energy() const {
  double e = 0.0;
  for (double v : samples_) e += v * v;
  return e;
}

Signal Signal::scaled(double gain) const {
  std::vector<double> out(samples_);
  for (double& v : out) v *= gain;
  return Signal(std::move(out), sample_rate_);
}

CorrelationFunction::CorrelationFunction(std::vector<double> v, int min_lag_, int sample_rate_)
    : values(std::move(v)), min_lag(min_lag_), sample_rate(sample_rate_) {
  require(!values.empty(), "correlation function is empty");
  require(std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); }),
          "correlation function contains non-finite values");
}

int CorrelationFunction::argmax() const {
  auto it = std::max_element(values.begin(), values.end());
  return min_lag + static_cast<int>(it - values.begin());
}

CorrelationFunction CorrelationFunction::window(int half_width) const {
  require(half_width >= 0 && contains(-half_width) && contains(half_width),
          "lag window exceeds correlation range");
  auto first = values.begin() + (-half_width - min_lag);
  return CorrelationFunction(std::vector<double>(first, first + 2 * half_width + 1), -half_width,
                             sample_rate);
}

double CorrelationFunction::sum_of_squares() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

}  // namespace esw
