#include "esw/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

#include "esw/signal.hpp"

namespace esw::fft {
namespace {

// FFTW's planner is not re-entrant; execution of an existing plan on new
// arrays is. Plans are created once per size under a lock and never freed.
enum class Direction { kForward, kInverse };

fftw_plan plan_for(std::size_t n, Direction dir) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, Direction>, fftw_plan> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(n, dir);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::vector<double> real(n);
  std::vector<std::complex<double>> cplx(n / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = dir == Direction::kForward
                       ? fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c, flags)
                       : fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(), flags);
  require(plan != nullptr, "FFT planning failed");
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

Spectrum forward(std::span<const double> x, std::size_t n) {
  require(n >= 2 && n % 2 == 0, "FFT size must be even");
  require(x.size() <= n, "FFT input longer than transform size");
  std::vector<double> buf(n, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  Spectrum out(n / 2 + 1);
  fftw_execute_dft_r2c(plan_for(n, Direction::kForward), buf.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse(std::span<const std::complex<double>> half_spectrum, std::size_t n) {
  require(n >= 2 && n % 2 == 0 && half_spectrum.size() == n / 2 + 1,
          "inverse FFT size does not match spectrum");
  // c2r overwrites its input.
  Spectrum scratch(half_spectrum.begin(), half_spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plan_for(n, Direction::kInverse),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  require(!x.empty() && !h.empty(), "convolution of an empty sequence");
  const std::size_t out_len = x.size() + h.size() - 1;
  std::size_t n = next_pow2(std::max<std::size_t>(4 * h.size(), 1024));
  n = std::min(n, next_pow2(out_len));
  n = std::max<std::size_t>(n, 2);
  const std::size_t block = n - h.size() + 1;

  const Spectrum kernel = forward(h, n);
  std::vector<double> out(out_len, 0.0);
  for (std::size_t start = 0; start < x.size(); start += block) {
    const std::size_t len = std::min(block, x.size() - start);
    Spectrum spec = forward(x.subspan(start, len), n);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel[k];
    const std::vector<double> part = inverse(spec, n);
    const std::size_t valid = std::min(len + h.size() - 1, out_len - start);
    for (std::size_t i = 0; i < valid; ++i) out[start + i] += part[i];
  }
  return out;
}

}  // namespace esw::fft
