#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace esw::fft {

using Spectrum = std::vector<std::complex<double>>;

// Real-input forward transform of `x` zero-padded to `n` points (n even).
// Returns the n/2 + 1 non-negative frequency bins, unnormalized.
Spectrum forward(std::span<const double> x, std::size_t n);

// Inverse of forward(): n real samples, scaled by 1/n so inverse(forward(x)) == x.
std::vector<double> inverse(std::span<const std::complex<double>> half_spectrum, std::size_t n);

// Full linear convolution (length |x| + |h| - 1) by overlap-add.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

}  // namespace esw::fft
