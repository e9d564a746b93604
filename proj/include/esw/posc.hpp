#pragma once

#include <string>
#include <variant>
#include <vector>

#include "esw/dsp.hpp"
#include "esw/hrir.hpp"
#include "esw/kernels.hpp"
#include "esw/signal.hpp"

namespace esw::posc {

// C(theta) or C_rho(theta) sampled on the basis azimuth grid.
struct SpatialCorrelation {
  std::vector<double> azimuths;
  std::vector<double> values;
  hrir::BasisKind kind = hrir::BasisKind::kPhaseOnly;

  std::size_t argmax() const;
};

// Default projection half-width: 1 ms of lags.
int default_lag_window(int sample_rate);

// C(theta) = sum_{|k| <= W} r(k) r_theta(k) against a magnitude basis.
SpatialCorrelation spatial_correlation(const CorrelationFunction& r, const hrir::DirectionalBasis& basis,
                                       int lag_window, Exec exec = Exec::kParallel);

// C_rho(theta) = sum_{|k| <= W} rho(k) rho_theta(k) against a phase-only basis.
SpatialCorrelation phase_spatial_correlation(const CorrelationFunction& rho,
                                             const hrir::DirectionalBasis& basis, int lag_window,
                                             Exec exec = Exec::kParallel);

// Convenience: GCC-PHAT of the binaural pair followed by the projection.
SpatialCorrelation posc_of_pair(const Signal& x_l, const Signal& x_r, const hrir::DirectionalBasis& basis,
                                int lag_window, const GccPhatOptions& gcc = {});

struct SpatiogramOptions {
  double frame_ms = 80.0;
  double overlap = 0.5;
  int lag_window = -1;        // samples; -1 selects 1 ms
  double silence_db = 60.0;   // frames this far below the loudest frame become zero rows
  GccPhatOptions gcc;
};

// Short-time POSC, one row per frame: a Hann-windowed frame pair is
// whitened with GCC-PHAT and projected on the basis.
struct Spatiogram {
  std::vector<double> frame_times;   // frame centers, seconds
  std::vector<double> azimuths;
  std::vector<std::vector<double>> values;  // frames x azimuths
  std::size_t frame_length = 0;
  std::size_t hop = 0;
  std::vector<bool> active;          // false for silent frames
};

std::size_t frame_length_samples(double frame_ms, int sample_rate);
std::size_t frame_count(std::size_t signal_length, std::size_t frame_length, std::size_t hop);

Spatiogram spatiogram(const Signal& x_l, const Signal& x_r, const hrir::DirectionalBasis& basis,
                      const SpatiogramOptions& opt = {}, Exec exec = Exec::kParallel);

struct Peak {
  double azimuth_deg = 0.0;
  double value = 0.0;
};

struct KnownCount {
  int count = 1;
};

struct Automatic {
  double rel_threshold = 0.5;
  double min_separation_deg = 10.0;
};

using PeakMode = std::variant<KnownCount, Automatic>;

struct WidthEstimate {
  std::vector<Peak> peaks;  // ascending azimuth
  double angular_width_deg = 0.0;
  std::string mode;         // "known_count" or "automatic"
};

// Indices of local maxima: strictly above both neighbours (a missing
// neighbour at the grid edge counts as lower). A plateau of equal values
// that is a maximum reports its lowest azimuth.
std::vector<std::size_t> local_maxima(const std::vector<double>& values);

WidthEstimate detect_peaks(const SpatialCorrelation& c, const PeakMode& mode);

// Difference between the extreme peak azimuths; 0 for fewer than two peaks.
double angular_width(const std::vector<Peak>& peaks);

// |v|-weighted standard deviation of the lag, in samples.
double dispersion(const CorrelationFunction& c);

std::string to_csv(const SpatialCorrelation& c);
std::string to_csv(const Spatiogram& s);
std::string to_json(const WidthEstimate& w);

}  // namespace esw::posc
