#include "esw/kernels.hpp"

#include <algorithm>
#include <cstddef>

#include "esw/signal.hpp"

namespace esw::kernels {
namespace {

// Overlap of a[n] and b[n - k]: n in [lo, hi).
inline void overlap(std::ptrdiff_t na, std::ptrdiff_t nb, std::ptrdiff_t k, std::ptrdiff_t& lo,
                    std::ptrdiff_t& hi) {
  lo = std::max<std::ptrdiff_t>(0, k);
  hi = std::min<std::ptrdiff_t>(na, nb + k);
}

}  // namespace

std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    int min_lag, int max_lag) {
  require(min_lag <= max_lag, "empty lag range");
  const auto na = static_cast<std::ptrdiff_t>(a.size());
  const auto nb = static_cast<std::ptrdiff_t>(b.size());
  const int count = max_lag - min_lag + 1;
  std::vector<double> out(static_cast<std::size_t>(count), 0.0);
  const double* pa = a.data();
  const double* pb = b.data();

#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < count; ++i) {
    std::ptrdiff_t lo, hi;
    const std::ptrdiff_t k = min_lag + i;
    overlap(na, nb, k, lo, hi);
    double acc = 0.0;
    for (std::ptrdiff_t n = lo; n < hi; ++n) acc += pa[n] * pb[n - k];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  require(!x.empty() && !h.empty(), "convolution of an empty sequence");
  const auto nx = static_cast<std::ptrdiff_t>(x.size());
  const auto nh = static_cast<std::ptrdiff_t>(h.size());
  const std::ptrdiff_t ny = nx + nh - 1;
  std::vector<double> y(static_cast<std::size_t>(ny));
  const double* px = x.data();
  const double* ph = h.data();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < ny; ++n) {
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, n - nx + 1);
    const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(nh - 1, n);
    double acc = 0.0;
    for (std::ptrdiff_t j = j0; j <= j1; ++j) acc += ph[j] * px[n - j];
    y[static_cast<std::size_t>(n)] = acc;
  }
  return y;
}

std::vector<double> block_energies(std::span<const double> y, std::size_t block) {
  require(block >= 1, "block length must be positive");
  const auto count = static_cast<std::ptrdiff_t>(y.size() / block);
  std::vector<double> out(static_cast<std::size_t>(count));

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < count; ++m) {
    const double* p = y.data() + static_cast<std::size_t>(m) * block;
    double acc = 0.0;
    for (std::size_t n = 0; n < block; ++n) acc += p[n] * p[n];
    out[static_cast<std::size_t>(m)] = acc;
  }
  return out;
}

namespace reference {

std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    int min_lag, int max_lag) {
  require(min_lag <= max_lag, "empty lag range");
  std::vector<double> out;
  for (int k = min_lag; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(a.size()); ++n) {
      const std::ptrdiff_t m = n - k;
      if (m < 0 || m >= static_cast<std::ptrdiff_t>(b.size())) continue;
      acc += a[static_cast<std::size_t>(n)] * b[static_cast<std::size_t>(m)];
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  require(!x.empty() && !h.empty(), "convolution of an empty sequence");
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (j > n || n - j >= x.size()) continue;
      acc += h[j] * x[n - j];
    }
    y[n] = acc;
  }
  return y;
}

std::vector<double> block_energies(std::span<const double> y, std::size_t block) {
  require(block >= 1, "block length must be positive");
  std::vector<double> out;
  for (std::size_t start = 0; start + block <= y.size(); start += block) {
    double acc = 0.0;
    for (std::size_t n = start; n < start + block; ++n) acc += y[n] * y[n];
    out.push_back(acc);
  }
  return out;
}

}  // namespace reference
}  // namespace esw::kernels
