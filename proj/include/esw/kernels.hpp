#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (namespace
// esw::kernels) and a plain serial reference (esw::kernels::reference) kept
// for testing and benchmarking. Both produce bit-identical results: every
// output element is reduced in the same order by both versions.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

namespace esw {

// Selects the OpenMP or the single-threaded path of a loop-level operation.
enum class Exec { kParallel, kSerial };

// Runs body(i) for i in [0, n). Iterations must write disjoint outputs. The
// first exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace kernels {

// out[k - min_lag] = sum_n a[n] * b[n - k] for k in [min_lag, max_lag].
std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    int min_lag, int max_lag);

// Full linear convolution, length |x| + |h| - 1.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

// Sum of y^2 over consecutive non-overlapping blocks; a trailing partial block is dropped.
std::vector<double> block_energies(std::span<const double> y, std::size_t block);

namespace reference {

std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    int min_lag, int max_lag);
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);
std::vector<double> block_energies(std::span<const double> y, std::size_t block);

}  // namespace reference
}  // namespace kernels
}  // namespace esw
