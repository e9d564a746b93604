#include "esw/hrir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "esw/fft.hpp"

namespace esw::hrir {
namespace {

constexpr double kAzimuthTolerance = 1e-6;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Largest offset any ear needs so the shadow filter's left tail stays causal.
int base_offset(const SphericalHeadParams& p) {
  const int d_max = itd_samples(90.0, p);
  return (d_max + 1) / 2 + p.shadow_half_taps;
}

// Zero-phase FIR with the magnitude response of the first-order low-pass
// (1 - a) / (1 - a z^-1), a = exp(-2 pi fc / fs), truncated to +-half_taps
// and normalized to unit DC gain. Zero phase keeps the far-ear delay exactly
// on the integer ITD.
std::vector<double> shadow_filter(double azimuth_deg, const SphericalHeadParams& p) {
  const double cutoff =
      p.shadow_f0_hz * (1.0 + std::cos(deg2rad(std::abs(azimuth_deg)))) / 2.0 + p.shadow_fmin_hz;
  const double a = std::exp(-2.0 * std::numbers::pi * cutoff / p.sample_rate);
  constexpr std::size_t kDesignSize = 8192;
  fft::Spectrum magnitude(kDesignSize / 2 + 1);
  for (std::size_t k = 0; k < magnitude.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / kDesignSize;
    magnitude[k] = (1.0 - a) / std::sqrt(1.0 - 2.0 * a * std::cos(w) + a * a);
  }
  const std::vector<double> impulse = fft::inverse(magnitude, kDesignSize);
  const int half = p.shadow_half_taps;
  std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int j = -half; j <= half; ++j) {
    const double v = impulse[static_cast<std::size_t>((j + static_cast<int>(kDesignSize)) % static_cast<int>(kDesignSize))];
    h[static_cast<std::size_t>(j + half)] = v;
    sum += v;
  }
  for (double& v : h) v /= sum;
  // Enforce exact symmetry so mirrored azimuths stay bit-identical.
  for (int j = 1; j <= half; ++j) h[static_cast<std::size_t>(half - j)] = h[static_cast<std::size_t>(half + j)];
  return h;
}

}  // namespace

HrirBank::HrirBank(int sample_rate, std::vector<HrirEntry> entries)
    : sample_rate_(sample_rate), entries_(std::move(entries)) {
  require(sample_rate_ > 0, "HRIR bank sample rate must be positive");
  require(!entries_.empty(), "HRIR bank is empty");
  const std::size_t len = entries_.front().left.size();
  require(len >= 1, "HRIR impulse responses must hold at least one sample");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    require(std::isfinite(e.azimuth_deg) && e.azimuth_deg >= -180.0 && e.azimuth_deg < 180.0,
            "HRIR azimuth outside [-180, 180)");
    require(e.left.size() == len && e.right.size() == len,
            "HRIR length mismatch at azimuth " + std::to_string(e.azimuth_deg));
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    require(finite(e.left) && finite(e.right), "HRIR contains non-finite values");
    if (i > 0) {
      const double prev = entries_[i - 1].azimuth_deg;
      require(e.azimuth_deg != prev, "duplicate azimuth " + std::to_string(e.azimuth_deg));
      require(e.azimuth_deg > prev, "HRIR azimuths not strictly increasing");
    }
  }
}

std::vector<double> HrirBank::azimuths() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.azimuth_deg);
  return out;
}

std::optional<std::size_t> HrirBank::index_of(double azimuth_deg) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (std::abs(entries_[i].azimuth_deg - azimuth_deg) <= kAzimuthTolerance) return i;
  }
  return std::nullopt;
}

const HrirEntry& HrirBank::at(double azimuth_deg) const {
  auto idx = index_of(azimuth_deg);
  require(idx.has_value(),
          "azimuth " + std::to_string(azimuth_deg) + " not in HRIR bank (no interpolation)");
  return entries_[*idx];
}

double woodworth_itd_seconds(double azimuth_deg, double head_radius_m, double speed_of_sound) {
  const double theta = deg2rad(std::abs(azimuth_deg));
  return head_radius_m / speed_of_sound * (std::sin(theta) + theta);
}

int itd_samples(double azimuth_deg, const SphericalHeadParams& p) {
  return static_cast<int>(
      std::lround(woodworth_itd_seconds(azimuth_deg, p.head_radius_m, p.speed_of_sound) * p.sample_rate));
}

int interaural_lag(double azimuth_deg, const SphericalHeadParams& p) {
  const int d = itd_samples(azimuth_deg, p);
  return azimuth_deg > 0.0 ? -d : d;
}

EarDelays ear_delays(double azimuth_deg, const SphericalHeadParams& p) {
  const int base = base_offset(p);
  const int d = itd_samples(azimuth_deg, p);
  const int near = base - d / 2;
  const int far = base + (d + 1) / 2;
  if (azimuth_deg > 0.0) return {far, near};
  if (azimuth_deg < 0.0) return {near, far};
  return {base, base};
}

std::vector<double> frontal_grid(double step_deg) {
  require(step_deg > 0.0 && step_deg <= 30.0, "grid step must be in (0, 30] degrees");
  std::vector<double> grid{0.0};
  for (int i = 1; i * step_deg <= 90.0 + 1e-9; ++i) {
    grid.push_back(i * step_deg);
    grid.push_back(-i * step_deg);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

HrirBank synth_spherical_bank(const SphericalHeadParams& p) {
  require(p.head_radius_m > 0.0, "head radius must be positive");
  require(p.speed_of_sound > 0.0, "speed of sound must be positive");
  require(p.sample_rate > 0, "sample rate must be positive");
  require(p.shadow_half_taps >= 0, "shadow filter length must be non-negative");
  const std::vector<double> grid = frontal_grid(p.grid_step_deg);
  const int base = base_offset(p);
  require(p.ir_length >= static_cast<std::size_t>(2 * base + 1),
          "ir_length too short to hold the maximum delay (need " + std::to_string(2 * base + 1) +
              " samples)");

  std::vector<HrirEntry> entries;
  entries.reserve(grid.size());
  for (double az : grid) {
    HrirEntry e{az, std::vector<double>(p.ir_length, 0.0), std::vector<double>(p.ir_length, 0.0)};
    const EarDelays delays = ear_delays(az, p);
    if (az == 0.0) {
      e.left[static_cast<std::size_t>(delays.left)] = 1.0;
      e.right[static_cast<std::size_t>(delays.right)] = 1.0;
    } else {
      const bool right_is_near = az > 0.0;
      auto& near_ir = right_is_near ? e.right : e.left;
      auto& far_ir = right_is_near ? e.left : e.right;
      const int near_delay = right_is_near ? delays.right : delays.left;
      const int far_delay = right_is_near ? delays.left : delays.right;
      near_ir[static_cast<std::size_t>(near_delay)] = 1.0;
      const std::vector<double> shadow = shadow_filter(az, p);
      for (std::size_t j = 0; j < shadow.size(); ++j) {
        far_ir[static_cast<std::size_t>(far_delay - p.shadow_half_taps) + j] = shadow[j];
      }
    }
    entries.push_back(std::move(e));
  }
  return HrirBank(p.sample_rate, std::move(entries));
}

std::string serialize_bank(const HrirBank& bank) {
  nlohmann::json doc;
  doc["sample_rate"] = bank.sample_rate();
  doc["ir_length"] = bank.ir_length();
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : bank.entries()) {
    doc["entries"].push_back({{"azimuth_deg", e.azimuth_deg}, {"left", e.left}, {"right", e.right}});
  }
  return doc.dump();
}

HrirBank parse_bank(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed HRIR manifest: ") + ex.what());
  }
  int sample_rate = 0;
  std::size_t ir_length = 0;
  std::vector<HrirEntry> entries;
  try {
    sample_rate = doc.at("sample_rate").get<int>();
    ir_length = doc.at("ir_length").get<std::size_t>();
    for (const auto& item : doc.at("entries")) {
      entries.push_back({item.at("azimuth_deg").get<double>(),
                         item.at("left").get<std::vector<double>>(),
                         item.at("right").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed HRIR manifest: ") + ex.what());
  }
  require(!entries.empty(), "malformed HRIR manifest: no entries");
  for (const auto& e : entries) {
    require(e.left.size() == ir_length && e.right.size() == ir_length,
            "HRIR length mismatch at azimuth " + std::to_string(e.azimuth_deg) +
                " (ir_length " + std::to_string(ir_length) + ")");
  }
  return HrirBank(sample_rate, std::move(entries));
}

HrirBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open HRIR bank: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bank(ss.str());
}

void save_bank(const HrirBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), "cannot write HRIR bank: " + path.string());
  out << serialize_bank(bank) << '\n';
  require(out.good(), "failed writing HRIR bank: " + path.string());
}

std::vector<double> DirectionalBasis::azimuths() const {
  std::vector<double> out;
  for (const auto& e : entries) out.push_back(e.azimuth_deg);
  return out;
}

DirectionalBasis magnitude_basis(const HrirBank& bank, int max_lag, Exec exec) {
  require(max_lag >= 0 && static_cast<std::size_t>(max_lag) < bank.ir_length(),
          "max_lag must be below the impulse-response length");
  DirectionalBasis out{BasisKind::kMagnitude, bank.sample_rate(),
                       std::vector<BasisEntry>(bank.size())};
  for_each_index(bank.size(), exec, [&](std::size_t i) {
    const auto& e = bank.entries()[i];
    auto values = exec == Exec::kParallel
                      ? kernels::cross_correlate(e.right, e.left, -max_lag, max_lag)
                      : kernels::reference::cross_correlate(e.right, e.left, -max_lag, max_lag);
    out.entries[i] = {e.azimuth_deg, CorrelationFunction(std::move(values), -max_lag, bank.sample_rate())};
  });
  return out;
}

DirectionalBasis phase_basis(const HrirBank& bank, const GccPhatOptions& opt, Exec exec) {
  DirectionalBasis out{BasisKind::kPhaseOnly, bank.sample_rate(),
                       std::vector<BasisEntry>(bank.size())};
  for_each_index(bank.size(), exec, [&](std::size_t i) {
    const auto& e = bank.entries()[i];
    out.entries[i] = {e.azimuth_deg, gcc_phat(Signal(e.right, bank.sample_rate()),
                                              Signal(e.left, bank.sample_rate()), opt)};
  });
  return out;
}

}  // namespace esw::hrir
