#pragma once

#include <map>
#include <string>
#include <vector>

#include "esw/kernels.hpp"
#include "esw/signal.hpp"

namespace esw::mtbe {

// Zwicker critical bandwidth 25 + 75 (1 + 1.4 (f / 1 kHz)^2)^0.69, in Hz.
double critical_bandwidth(double f_hz);

enum class Band { kLow, kMid, kHigh };

const char* to_string(Band band);

struct GaborFilterSpec {
  double center_hz = 0.0;
  double time_spread_s = 0.0;      // T_k = 1 / CB(center)
  std::size_t window_length = 0;   // 2 round(3 T_k fs) + 1, always odd
  std::size_t patch_length = 0;    // round(T_k fs)
  Band band = Band::kLow;
};

// Center-frequency grids: low band from low_start in low_step up to low_end,
// then mid_step up to mid_end, then high_step up to high_end.
struct FilterbankLayout {
  double low_start_hz = 10.0;
  double low_step_hz = 10.0;
  double low_end_hz = 800.0;
  double mid_step_hz = 100.0;
  double mid_end_hz = 5000.0;
  double high_step_hz = 500.0;
  double high_end_hz = 16000.0;
};

std::vector<GaborFilterSpec> build_filterbank(int sample_rate, const FilterbankLayout& layout = {});

// Cosine-modulated Gaussian exp(-t^2 / (2 T^2)) cos(2 pi f t), centered, t = j / fs.
std::vector<double> gabor_kernel(const GaborFilterSpec& spec, int sample_rate);

struct TimeBandEnergy {
  // energies[k][m]: energy of the m-th non-overlapping patch of filter k's output.
  std::vector<std::vector<double>> energies;
  std::vector<std::size_t> patch_lengths;
};

// Each filter's output (same-length convolution with the centered kernel)
// summed in squares over patches of round(T_k fs) samples; the trailing
// partial patch is dropped.
TimeBandEnergy patch_energies(const Signal& s, const std::vector<GaborFilterSpec>& bank,
                              Exec exec = Exec::kParallel);

struct MtbeOptions {
  // log10 floor for silent patches, relative to the global mean patch energy.
  double floor_relative = 1e-12;
  FilterbankLayout layout;
};

struct BandWeights {
  double low = 1.0;
  double mid = 0.5;
  double high = 1.0;
};

std::vector<double> band_weights(const std::vector<GaborFilterSpec>& bank, const BandWeights& w = {});

struct MtbeResult {
  double e_m_db = 0.0;
  double e_m_w_db = 0.0;
  double low_db = 0.0;
  double mid_db = 0.0;
  double high_db = 0.0;
  std::vector<double> center_hz;
  std::vector<double> per_filter_db;  // (1/M_k) sum_m 10 log10 E[k, m]
  std::size_t floored_patches = 0;
};

// E_M = (1/K) sum_k per_filter_db[k]; e_m_w_db uses the default band profile.
MtbeResult mtbe(const Signal& s, const MtbeOptions& opt = {}, Exec exec = Exec::kParallel);

// As mtbe(), with e_m_w_db = sum_k (w_k / sum w) per_filter_db[k].
MtbeResult mtbe_weighted(const Signal& s, const std::vector<double>& weights,
                         const MtbeOptions& opt = {}, Exec exec = Exec::kParallel);

// score_i = reference_max_percent * 10^((v_i - v_max) / 20).
std::map<std::string, double> relative_scores(const std::map<std::string, double>& values_db,
                                              double reference_max_percent);

std::string to_json(const MtbeResult& r);
std::string per_filter_csv(const MtbeResult& r);

}  // namespace esw::mtbe
