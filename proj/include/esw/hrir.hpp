#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "esw/dsp.hpp"
#include "esw/signal.hpp"

namespace esw::hrir {

struct HrirEntry {
  double azimuth_deg = 0.0;  // [-180, 180); negative is left of the listener
  std::vector<double> left;
  std::vector<double> right;

  bool operator==(const HrirEntry&) const = default;
};

// Azimuth-indexed left/right impulse-response pairs. Azimuths strictly
// increase and every response has the same length.
class HrirBank {
 public:
  HrirBank(int sample_rate, std::vector<HrirEntry> entries);

  int sample_rate() const { return sample_rate_; }
  std::size_t ir_length() const { return entries_.front().left.size(); }
  const std::vector<HrirEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::vector<double> azimuths() const;

  // Entry at exactly this azimuth (1e-6 degree tolerance); nullopt otherwise.
  std::optional<std::size_t> index_of(double azimuth_deg) const;
  const HrirEntry& at(double azimuth_deg) const;

  bool operator==(const HrirBank&) const = default;

 private:
  int sample_rate_;
  std::vector<HrirEntry> entries_;
};

struct SphericalHeadParams {
  double grid_step_deg = 5.0;
  double head_radius_m = 0.0875;
  double speed_of_sound = 343.0;
  std::size_t ir_length = 256;
  int sample_rate = 48000;
  // Contralateral head shadow: cutoff f0 * (1 + cos|theta|) / 2 + f_min.
  double shadow_f0_hz = 8000.0;
  double shadow_fmin_hz = 500.0;
  int shadow_half_taps = 32;
};

// Woodworth interaural delay (a / c)(sin|theta| + |theta|) in seconds.
double woodworth_itd_seconds(double azimuth_deg, double head_radius_m, double speed_of_sound);

// Woodworth delay rounded to whole samples (non-negative).
int itd_samples(double azimuth_deg, const SphericalHeadParams& p);

// Signed binaural lag p^r - p^l of the synthetic head; negative for sources
// on the right, where the right ear leads.
int interaural_lag(double azimuth_deg, const SphericalHeadParams& p);

struct EarDelays {
  int left = 0;
  int right = 0;
};

// Integer path delays used by the synthetic bank at this azimuth.
EarDelays ear_delays(double azimuth_deg, const SphericalHeadParams& p);

// Symmetric azimuth grid 0, +-step, +-2 step, ... inside [-90, 90].
std::vector<double> frontal_grid(double step_deg);

// Spherical-head bank: integer ITD split around a common offset, and a
// zero-phase first-order low-pass applied to the far ear for the ILD.
HrirBank synth_spherical_bank(const SphericalHeadParams& p = {});

HrirBank load_bank(const std::filesystem::path& path);
void save_bank(const HrirBank& bank, const std::filesystem::path& path);
HrirBank parse_bank(const std::string& json_text);
std::string serialize_bank(const HrirBank& bank);

enum class BasisKind { kMagnitude, kPhaseOnly };

struct BasisEntry {
  double azimuth_deg = 0.0;
  CorrelationFunction basis;
};

struct DirectionalBasis {
  BasisKind kind = BasisKind::kMagnitude;
  int sample_rate = 0;
  std::vector<BasisEntry> entries;

  std::vector<double> azimuths() const;
};

// r_theta(k) = sum_p h^r(p) h^l(p - k) per azimuth, k in [-max_lag, max_lag].
DirectionalBasis magnitude_basis(const HrirBank& bank, int max_lag, Exec exec = Exec::kParallel);

// rho_theta(k): GCC-PHAT of the right against the left impulse response.
DirectionalBasis phase_basis(const HrirBank& bank, const GccPhatOptions& opt = {},
                             Exec exec = Exec::kParallel);

}  // namespace esw::hrir
