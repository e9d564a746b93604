#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "esw/dsp.hpp"
#include "esw/fft.hpp"
#include "esw/kernels.hpp"
#include "esw/random.hpp"
#include "esw/signal.hpp"
#include "oracles.hpp"

using namespace esw;

namespace {

Signal impulse_at(std::size_t n, std::size_t len, int fs = 48000) {
  std::vector<double> x(len, 0.0);
  x[n] = 1.0;
  return Signal(std::move(x), fs);
}

}  // namespace

TEST(SignalTest, RejectsInvalidConstruction) {
  EXPECT_THROW(Signal({}, 48000), Error);
  EXPECT_THROW(Signal({1.0}, 0), Error);
  EXPECT_THROW(Signal({std::numeric_limits<double>::quiet_NaN()}, 48000), Error);
  EXPECT_THROW(Signal({std::numeric_limits<double>::infinity()}, 48000), Error);
}

TEST(SignalTest, EnergyAndScaling) {
  Signal s({1.0, -2.0, 2.0}, 8000);
  EXPECT_DOUBLE_EQ(s.energy(), 9.0);
  EXPECT_DOUBLE_EQ(s.scaled(2.0).energy(), 36.0);
  EXPECT_DOUBLE_EQ(s.duration_s(), 3.0 / 8000.0);
}

TEST(CorrelationFunctionTest, WindowAndArgmax) {
  CorrelationFunction c({1.0, 3.0, 3.0, 0.5, 0.0}, -2, 48000);
  EXPECT_EQ(c.max_lag(), 2);
  EXPECT_EQ(c.argmax(), -1);  // tie resolves to the smaller lag
  const auto w = c.window(1);
  EXPECT_EQ(w.min_lag, -1);
  EXPECT_EQ(w.values, (std::vector<double>{3.0, 3.0, 0.5}));
  EXPECT_THROW(c.window(3), Error);
}

TEST(WhiteNoiseTest, ZeroSigmaIsSilent) {
  const Signal s = white_noise(10, 0.0, 7);
  for (double v : s.samples()) EXPECT_EQ(v, 0.0);
}

TEST(WhiteNoiseTest, VarianceAtTenSeconds) {
  const Signal s = white_noise(480000, 1.0, 1);
  const double mean = std::accumulate(s.samples().begin(), s.samples().end(), 0.0) / s.size();
  double var = 0.0;
  for (double v : s.samples()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.size());
  EXPECT_GE(var, 0.99);
  EXPECT_LE(var, 1.01);
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(WhiteNoiseTest, Deterministic) {
  EXPECT_EQ(white_noise(1000, 0.5, 42), white_noise(1000, 0.5, 42));
  EXPECT_NE(white_noise(1000, 0.5, 42), white_noise(1000, 0.5, 43));
}

TEST(RngTest, UniformIntCoversRangeInclusive) {
  Rng rng(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    ++hits[static_cast<std::size_t>(v + 3)];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(DelayTest, ShiftsAndAdvances) {
  const Signal d = delay(impulse_at(0, 16), 5, 16);
  EXPECT_EQ(d.samples(), impulse_at(5, 16).samples());
  const Signal a = delay(impulse_at(3, 16), -3, 16);
  EXPECT_EQ(a.samples(), impulse_at(0, 16).samples());
  const Signal x = white_noise(64, 1.0, 3);
  EXPECT_EQ(delay(x, 0, x.size()), x);
}

TEST(CrossCorrelationTest, ImpulseIsDelta) {
  const auto r = cross_correlation(impulse_at(0, 32), impulse_at(0, 32), 8);
  for (int k = -8; k <= 8; ++k) EXPECT_EQ(r.at(k), k == 0 ? 1.0 : 0.0);
}

TEST(CrossCorrelationTest, PeakAtPathDifference) {
  const Signal s = white_noise(4096, 1.0, 9);
  const Signal xr = delay(s, 10, 4200);
  const Signal xl = delay(s, 2, 4200);
  const auto r = cross_correlation(xr, xl, 32);
  EXPECT_EQ(r.argmax(), 8);
  for (int k = -32; k <= 32; ++k) {
    EXPECT_NEAR(r.at(k), oracle::xcorr_at(xr.samples(), xl.samples(), k), 1e-9);
  }
}

TEST(CrossCorrelationTest, SwappingArgumentsMirrorsLags) {
  const Signal a = white_noise(2000, 1.0, 1);
  const Signal b = white_noise(2000, 1.0, 2);
  const auto ab = cross_correlation(a, b, 40);
  const auto ba = cross_correlation(b, a, 40);
  for (int k = -40; k <= 40; ++k) EXPECT_NEAR(ab.at(k), ba.at(-k), 1e-10);
}

TEST(CrossCorrelationTest, SerialAndParallelAreBitEqual) {
  const Signal a = white_noise(20000, 1.0, 11);
  const Signal b = white_noise(20000, 1.0, 12);
  EXPECT_EQ(cross_correlation(a, b, 48, Exec::kSerial), cross_correlation(a, b, 48, Exec::kParallel));
}

TEST(CrossCorrelationTest, Errors) {
  const Signal a = white_noise(100, 1.0, 1, 48000);
  const Signal b = white_noise(100, 1.0, 2, 44100);
  EXPECT_THROW(cross_correlation(a, b, 4), Error);
  EXPECT_THROW(cross_correlation(a, a, 100), Error);
}

TEST(IaccTest, IdentityAndScale) {
  const Signal x = white_noise(4800, 1.0, 4);
  const auto same = iacc(x, x, 48);
  EXPECT_NEAR(same.phi, 1.0, 1e-12);
  EXPECT_EQ(same.tau_at_max, 0);
  const auto half = iacc(x, x.scaled(0.5), 48);
  EXPECT_NEAR(half.phi, 1.0, 1e-12);
}

TEST(IaccTest, ScaleInvariantForEitherChannel) {
  const Signal a = white_noise(4800, 1.0, 5);
  const Signal b = delay(a, 3, 4800);
  const double base = iacc(a, b, 48).phi;
  EXPECT_NEAR(iacc(a.scaled(3.0), b.scaled(0.2), 48).phi, base, 1e-9);
}

TEST(IaccTest, IndependentNoiseIsWeaklyCorrelated) {
  const auto r = iacc(white_noise(480000, 1.0, 21), white_noise(480000, 1.0, 22), 48);
  EXPECT_LT(r.phi, 0.05);
  for (double v : r.function.values) {
    EXPECT_LE(v, 1.0 + 1e-9);
    EXPECT_GE(v, -1.0 - 1e-9);
  }
}

TEST(IaccTest, ZeroEnergyThrows) {
  EXPECT_THROW(iacc(Signal::zeros(100, 48000), white_noise(100, 1.0, 1), 8), Error);
}

TEST(GccPhatTest, MatchesDirectDftOracle) {
  const Signal s = white_noise(200, 1.0, 6);
  const Signal xr = delay(s, 7, 200);
  const auto rho = gcc_phat(xr, s);
  const auto ref = oracle::gcc_phat(xr.samples(), s.samples(), 512);
  ASSERT_EQ(rho.values.size(), ref.size());
  EXPECT_EQ(rho.min_lag, -256);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(rho.values[i], ref[i], 1e-9);
}

TEST(GccPhatTest, IdenticalChannelsGiveDeltaAtZero) {
  const Signal s = white_noise(8192, 1.0, 3);
  const auto rho = gcc_phat(s, s);
  EXPECT_EQ(rho.argmax(), 0);
  EXPECT_GE(rho.at(0), 0.99);
}

TEST(GccPhatTest, DelayedCopyPeaksAtDelay) {
  const Signal s = white_noise(8192, 1.0, 8);
  const auto rho = gcc_phat(delay(s, 12, 8192), s);
  EXPECT_EQ(rho.argmax(), 12);
}

TEST(GccPhatTest, UnitEnergy) {
  const auto rho = gcc_phat(white_noise(10000, 1.0, 1), white_noise(10000, 1.0, 2));
  EXPECT_NEAR(rho.sum_of_squares(), 1.0, 1e-6);
}

TEST(GccPhatTest, AllZeroInputThrows) {
  EXPECT_THROW(gcc_phat(Signal::zeros(64, 48000), Signal::zeros(64, 48000)), Error);
}

TEST(GccPhatTest, LengthMismatchThrows) {
  EXPECT_THROW(gcc_phat(white_noise(64, 1.0, 1), white_noise(65, 1.0, 1)), Error);
}

TEST(HannTest, SymmetricWithZeroEnds) {
  const auto w = hann(9);
  EXPECT_DOUBLE_EQ(w.front(), 0.0);
  EXPECT_DOUBLE_EQ(w.back(), 0.0);
  EXPECT_DOUBLE_EQ(w[4], 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], w[w.size() - 1 - i], 1e-15);
}

TEST(BandLimitTest, RemovesOutOfBandEnergy) {
  const Signal x = white_noise(48000, 1.0, 2);
  const Signal y = band_limit(x, 8000.0, 20000.0);
  EXPECT_EQ(y.size(), x.size());
  EXPECT_GT(band_energy(y, 9000.0, 20000.0), 1e4 * band_energy(y, 0.0, 7000.0));
}

TEST(FftTest, InverseRoundTrip) {
  const Signal x = white_noise(100, 1.0, 4);
  const auto back = fft::inverse(fft::forward(x.view(), 128), 128);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  for (std::size_t i = 100; i < 128; ++i) EXPECT_NEAR(back[i], 0.0, 1e-12);
}

TEST(FftTest, ConvolutionMatchesDirect) {
  const Signal x = white_noise(5000, 1.0, 5);
  const Signal h = white_noise(300, 1.0, 6);
  const auto fast = fft::convolve(x.view(), h.view());
  const auto direct = kernels::reference::convolve(x.view(), h.view());
  ASSERT_EQ(fast.size(), direct.size());
  for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], direct[i], 1e-9);
}

TEST(KernelsTest, ParallelMatchesReferenceBitForBit) {
  const Signal a = white_noise(3000, 1.0, 1);
  const Signal b = white_noise(257, 1.0, 2);
  EXPECT_EQ(kernels::cross_correlate(a.view(), a.view(), -60, 60),
            kernels::reference::cross_correlate(a.view(), a.view(), -60, 60));
  EXPECT_EQ(kernels::convolve(a.view(), b.view()), kernels::reference::convolve(a.view(), b.view()));
  EXPECT_EQ(kernels::block_energies(a.view(), 37), kernels::reference::block_energies(a.view(), 37));
}

TEST(KernelsTest, BlockEnergiesDropPartialBlock) {
  const std::vector<double> y{1, 1, 2, 2, 3};
  EXPECT_EQ(kernels::block_energies(y, 2), (std::vector<double>{2.0, 8.0}));
}

TEST(ForEachIndexTest, RethrowsFromWorkers) {
  EXPECT_THROW(for_each_index(100, Exec::kParallel,
                              [](std::size_t i) {
                                if (i == 57) throw Error("boom");
                              }),
               Error);
}
