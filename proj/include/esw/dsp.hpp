#pragma once

#include <vector>

#include "esw/kernels.hpp"
#include "esw/signal.hpp"

namespace esw {

// output[n] = x[n - d] where defined, zero elsewhere; d < 0 advances.
Signal delay(const Signal& x, long d, std::size_t total_length);

// r(k) = sum_n x_r(n) x_l(n - k), k in [-max_lag, max_lag], unnormalized.
// A source reaching the right ear p^r samples and the left ear p^l samples
// after emission peaks at k = p^r - p^l.
CorrelationFunction cross_correlation(const Signal& x_r, const Signal& x_l, int max_lag,
                                      Exec exec = Exec::kParallel);

struct IaccResult {
  CorrelationFunction function;  // normalized, within [-1, 1]
  double phi = 0.0;              // max over lags
  int tau_at_max = 0;
};

// Normalized interaural cross-correlation phi(tau) = sum x_l(t) x_r(t + tau) /
// sqrt(E_l E_r) with a rectangular window over the whole signal.
IaccResult iacc(const Signal& x_l, const Signal& x_r, int max_lag);

struct GccPhatOptions {
  // Bins with |X_r||X_l| below relative_floor * max_bin are divided by the floor.
  double relative_floor = 1e-8;
};

// Phase-transform weighted cross-correlation. FFT size is the next power of
// two >= 2 * length; the result spans lags [-N/2, N/2) and, when no bin is
// floored, has unit energy.
CorrelationFunction gcc_phat(const Signal& x_r, const Signal& x_l, const GccPhatOptions& opt = {});

// Symmetric Hann window of the given length.
std::vector<double> hann(std::size_t length);

// Zero-phase ideal band limiting: keeps bins with lo_hz <= f <= hi_hz.
Signal band_limit(const Signal& x, double lo_hz, double hi_hz);

// Energy of x inside [lo_hz, hi_hz] from its periodogram.
double band_energy(const Signal& x, double lo_hz, double hi_hz);

}  // namespace esw
