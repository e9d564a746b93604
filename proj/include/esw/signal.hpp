#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace esw {

// All domain failures (bad input, violated invariants, I/O) surface as this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniformly sampled mono waveform. Samples are finite, length >= 1.
class Signal {
 public:
  Signal(std::vector<double> samples, int sample_rate);

  static Signal zeros(std::size_t length, int sample_rate);

  const std::vector<double>& samples() const { return samples_; }
  std::span<const double> view() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double energy() const;
  double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_; }

  Signal scaled(double gain) const;

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

// Real sequence indexed by integer lag over [min_lag, max_lag].
struct CorrelationFunction {
  std::vector<double> values;
  int min_lag = 0;
  int sample_rate = 0;

  CorrelationFunction() = default;
  CorrelationFunction(std::vector<double> v, int min_lag, int sample_rate);

  int max_lag() const { return min_lag + static_cast<int>(values.size()) - 1; }
  bool contains(int lag) const { return lag >= min_lag && lag <= max_lag(); }
  double at(int lag) const { return values[static_cast<std::size_t>(lag - min_lag)]; }

  // Lag of the largest value; ties resolve to the smallest lag.
  int argmax() const;

  // Copy restricted to [-half_width, +half_width]; the window must be inside the range.
  CorrelationFunction window(int half_width) const;

  double sum_of_squares() const;

  bool operator==(const CorrelationFunction&) const = default;
};

void require(bool condition, const std::string& message);

std::size_t next_pow2(std::size_t n);

}  // namespace esw
