#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "esw/hrir.hpp"
#include "esw/kernels.hpp"
#include "esw/signal.hpp"

namespace esw::render {

enum class ScenarioKind { kLocalized, kReverb, kEnsemble };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_kind(const std::string& name);

struct SourceSpec {
  double azimuth_deg = 0.0;
  double gain = 1.0;        // amplitude sigma_i
  long delay_samples = 0;   // decorrelation delay d_i

  bool operator==(const SourceSpec&) const = default;
};

// Scenario description. Invariants (checked by validate()):
//   localized: one source, gain 1
//   reverb:    one gain-1 source at center, all others gain <= 0.5
//   ensemble:  every gain in [0.9, 1.1]
//   |d_i| <= 0.03 * sample_rate
struct EnsembleSpec {
  ScenarioKind kind = ScenarioKind::kLocalized;
  std::vector<SourceSpec> sources;
  double center_deg = 0.0;
  std::uint64_t seed = 0;
  int sample_rate = 48000;

  void validate() const;
  std::vector<double> azimuths() const;
  long max_abs_delay() const;

  bool operator==(const EnsembleSpec&) const = default;
};

std::string to_json(const EnsembleSpec& spec);
EnsembleSpec spec_from_json(const std::string& text);

// Sources uniformly spaced over [center - spread/2, center + spread/2].
// Reverb gains other than the center source are drawn from U[0.2, 0.5];
// ensemble sources get decorrelation delays drawn from U{-0.03 fs .. 0.03 fs}.
EnsembleSpec make_scenario(ScenarioKind kind, double center_deg, double spread_deg, int n_sources,
                           std::uint64_t seed, int sample_rate = 48000);

// Channel i = gain_i * delay(s, d_i), same length as s.
std::vector<Signal> decorrelate(const Signal& s, const EnsembleSpec& spec);

// Mutually independent unit-variance white noises scaled by each source gain.
std::vector<Signal> independent_sources(const EnsembleSpec& spec, std::size_t length,
                                        std::uint64_t seed);

struct BinauralPair {
  Signal left;
  Signal right;
};

// Integer ear path delays per source; lag_i = p^r_i - p^l_i.
struct ItdScenario {
  std::vector<long> right_delays;
  std::vector<long> left_delays;

  std::vector<long> lags() const;

  // Non-negative path delays realizing the given binaural differences.
  static ItdScenario from_lags(const std::vector<long>& lags);
  // The synthetic spherical head's rounded delays at each source azimuth.
  static ItdScenario from_head(const EnsembleSpec& spec, const hrir::SphericalHeadParams& head);
};

// x_r = sum_i delay(channel_i, p^r_i), x_l likewise; both sized to hold every delayed channel.
BinauralPair render_itd(const std::vector<Signal>& channels, const ItdScenario& scenario);

// x_{l,r} = sum_i h^{l,r}_i * channel_i. Every source azimuth must be on the
// bank grid. Output length = channel length + ir_length - 1. Sources are
// convolved concurrently and summed in ascending index order.
BinauralPair render_hrir(const std::vector<Signal>& channels, const EnsembleSpec& spec,
                         const hrir::HrirBank& bank, Exec exec = Exec::kParallel);

// Joint scaling so max |sample| over both ears equals `peak`.
BinauralPair normalize_peak(const BinauralPair& pair, double peak = 0.9);

}  // namespace esw::render
