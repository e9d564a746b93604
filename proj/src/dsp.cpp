#include "esw/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "esw/fft.hpp"

namespace esw {

Signal delay(const Signal& x, long d, std::size_t total_length) {
  require(total_length >= 1, "delay output length must be positive");
  std::vector<double> out(total_length, 0.0);
  const long n_in = static_cast<long>(x.size());
  const long n_out = static_cast<long>(total_length);
  const long lo = std::max(0L, d);
  const long hi = std::min(n_out, n_in + d);
  for (long n = lo; n < hi; ++n) out[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(n - d)];
  return Signal(std::move(out), x.sample_rate());
}

CorrelationFunction cross_correlation(const Signal& x_r, const Signal& x_l, int max_lag,
                                      Exec exec) {
  require(x_r.sample_rate() == x_l.sample_rate(), "sample rate mismatch");
  require(max_lag >= 0, "max_lag must be non-negative");
  require(static_cast<std::size_t>(max_lag) < std::min(x_r.size(), x_l.size()),
          "max_lag too large for signal length");
  auto values = exec == Exec::kParallel
                    ? kernels::cross_correlate(x_r.view(), x_l.view(), -max_lag, max_lag)
                    : kernels::reference::cross_correlate(x_r.view(), x_l.view(), -max_lag, max_lag);
  return CorrelationFunction(std::move(values), -max_lag, x_r.sample_rate());
}

IaccResult iacc(const Signal& x_l, const Signal& x_r, int max_lag) {
  const double el = x_l.energy();
  const double er = x_r.energy();
  require(el > 0.0 && er > 0.0, "zero-energy input: IACC normalization undefined");
  CorrelationFunction r = cross_correlation(x_r, x_l, max_lag);
  const double norm = std::sqrt(el) * std::sqrt(er);
  for (double& v : r.values) v /= norm;
  IaccResult out;
  out.tau_at_max = r.argmax();
  out.phi = r.at(out.tau_at_max);
  out.function = std::move(r);
  return out;
}

CorrelationFunction gcc_phat(const Signal& x_r, const Signal& x_l, const GccPhatOptions& opt) {
  require(x_r.sample_rate() == x_l.sample_rate(), "sample rate mismatch");
  require(x_r.size() == x_l.size(), "GCC-PHAT inputs must have equal length");
  require(opt.relative_floor > 0.0, "GCC-PHAT magnitude floor must be positive");

  const std::size_t n = std::max<std::size_t>(2, next_pow2(2 * x_r.size()));
  const fft::Spectrum xr = fft::forward(x_r.view(), n);
  const fft::Spectrum xl = fft::forward(x_l.view(), n);

  fft::Spectrum cross(xr.size());
  double max_mag = 0.0;
  for (std::size_t k = 0; k < xr.size(); ++k) {
    max_mag = std::max(max_mag, std::abs(xr[k]) * std::abs(xl[k]));
  }
  require(max_mag > 0.0, "all-zero input: GCC-PHAT spectrum is entirely floored");
  const double floor = opt.relative_floor * max_mag;
  for (std::size_t k = 0; k < xr.size(); ++k) {
    const double mag = std::abs(xr[k]) * std::abs(xl[k]);
    cross[k] = xr[k] * std::conj(xl[k]) / std::max(mag, floor);
  }
  const std::vector<double> circular = fft::inverse(cross, n);

  // Re-center circular lags to [-N/2, N/2).
  const std::size_t half = n / 2;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = circular[(i + half) % n];
  return CorrelationFunction(std::move(values), -static_cast<int>(half), x_r.sample_rate());
}

std::vector<double> hann(std::size_t length) {
  require(length >= 1, "window length must be positive");
  std::vector<double> w(length, 1.0);
  if (length == 1) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

Signal band_limit(const Signal& x, double lo_hz, double hi_hz) {
  require(lo_hz >= 0.0 && hi_hz > lo_hz, "invalid band edges");
  const std::size_t n = next_pow2(x.size()) * 2;
  fft::Spectrum spec = fft::forward(x.view(), n);
  const double bin_hz = static_cast<double>(x.sample_rate()) / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f < lo_hz || f > hi_hz) spec[k] = 0.0;
  }
  std::vector<double> y = fft::inverse(spec, n);
  y.resize(x.size());
  return Signal(std::move(y), x.sample_rate());
}

double band_energy(const Signal& x, double lo_hz, double hi_hz) {
  const std::size_t n = next_pow2(x.size());
  const fft::Spectrum spec = fft::forward(x.view(), n);
  const double bin_hz = static_cast<double>(x.sample_rate()) / static_cast<double>(n);
  double e = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f >= lo_hz && f <= hi_hz) e += std::norm(spec[k]);
  }
  return e;
}

}  // namespace esw
