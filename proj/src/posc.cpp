#include "esw/posc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <limits>

namespace esw::posc {
namespace {

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SpatialCorrelation project(const CorrelationFunction& r, const hrir::DirectionalBasis& basis,
                           int lag_window, hrir::BasisKind expected, Exec exec) {
  require(basis.kind == expected,
          expected == hrir::BasisKind::kPhaseOnly ? "POSC needs a phase-only basis"
                                                  : "spatial correlation needs a magnitude basis");
  require(!basis.entries.empty(), "directional basis is empty");
  require(r.sample_rate == basis.sample_rate, "correlation and basis sample rates differ");
  require(lag_window >= 0, "lag window must be non-negative");
  require(r.contains(-lag_window) && r.contains(lag_window),
          "lag window exceeds the correlation function's lag range");
  for (const auto& e : basis.entries) {
    require(e.basis.contains(-lag_window) && e.basis.contains(lag_window),
            "lag window exceeds the basis lag range");
  }

  SpatialCorrelation out;
  out.kind = expected;
  out.azimuths = basis.azimuths();
  out.values.assign(basis.entries.size(), 0.0);
  for_each_index(basis.entries.size(), exec, [&](std::size_t i) {
    const auto& b = basis.entries[i].basis;
    double acc = 0.0;
    for (int k = -lag_window; k <= lag_window; ++k) acc += r.at(k) * b.at(k);
    out.values[i] = acc;
  });
  return out;
}

}  // namespace

std::size_t SpatialCorrelation::argmax() const {
  require(!values.empty(), "empty spatial correlation");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

int default_lag_window(int sample_rate) {
  return static_cast<int>(std::lround(0.001 * sample_rate));
}

SpatialCorrelation spatial_correlation(const CorrelationFunction& r, const hrir::DirectionalBasis& basis,
                                       int lag_window, Exec exec) {
  return project(r, basis, lag_window, hrir::BasisKind::kMagnitude, exec);
}

SpatialCorrelation phase_spatial_correlation(const CorrelationFunction& rho,
                                             const hrir::DirectionalBasis& basis, int lag_window,
                                             Exec exec) {
  return project(rho, basis, lag_window, hrir::BasisKind::kPhaseOnly, exec);
}

SpatialCorrelation posc_of_pair(const Signal& x_l, const Signal& x_r, const hrir::DirectionalBasis& basis,
                                int lag_window, const GccPhatOptions& gcc) {
  return phase_spatial_correlation(gcc_phat(x_r, x_l, gcc), basis, lag_window);
}

std::size_t frame_length_samples(double frame_ms, int sample_rate) {
  require(frame_ms > 0.0, "frame length must be positive");
  return static_cast<std::size_t>(std::lround(frame_ms * 1e-3 * sample_rate));
}

std::size_t frame_count(std::size_t signal_length, std::size_t frame_length, std::size_t hop) {
  if (signal_length < frame_length || hop == 0) return 0;
  return (signal_length - frame_length) / hop + 1;
}

Spatiogram spatiogram(const Signal& x_l, const Signal& x_r, const hrir::DirectionalBasis& basis,
                      const SpatiogramOptions& opt, Exec exec) {
  require(x_l.sample_rate() == x_r.sample_rate(), "sample rate mismatch");
  require(x_l.size() == x_r.size(), "binaural channels differ in length");
  require(opt.overlap >= 0.0 && opt.overlap < 1.0, "frame overlap must be in [0, 1)");
  const int fs = x_l.sample_rate();
  const std::size_t frame_len = frame_length_samples(opt.frame_ms, fs);
  require(frame_len >= 2, "frame too short");
  require(x_l.size() >= frame_len, "signal shorter than one frame");
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(frame_len) * (1.0 - opt.overlap))));
  const int lag_window = opt.lag_window < 0 ? default_lag_window(fs) : opt.lag_window;
  const std::size_t frames = frame_count(x_l.size(), frame_len, hop);

  Spatiogram sg;
  sg.azimuths = basis.azimuths();
  sg.frame_length = frame_len;
  sg.hop = hop;
  sg.values.assign(frames, std::vector<double>(sg.azimuths.size(), 0.0));
  sg.active.assign(frames, false);
  for (std::size_t m = 0; m < frames; ++m) {
    sg.frame_times.push_back((static_cast<double>(m * hop) + frame_len / 2.0) / fs);
  }

  std::vector<double> energy_l(frames), energy_r(frames);
  for (std::size_t m = 0; m < frames; ++m) {
    double el = 0.0, er = 0.0;
    for (std::size_t n = m * hop; n < m * hop + frame_len; ++n) {
      el += x_l[n] * x_l[n];
      er += x_r[n] * x_r[n];
    }
    energy_l[m] = el;
    energy_r[m] = er;
  }
  double loudest = 0.0;
  for (std::size_t m = 0; m < frames; ++m) loudest = std::max(loudest, energy_l[m] + energy_r[m]);
  const double threshold = loudest * std::pow(10.0, -opt.silence_db / 10.0);

  const std::vector<double> window = hann(frame_len);
  for_each_index(frames, exec, [&](std::size_t m) {
    if (energy_l[m] <= 0.0 || energy_r[m] <= 0.0 || energy_l[m] + energy_r[m] < threshold) return;
    std::vector<double> fl(frame_len), fr(frame_len);
    for (std::size_t n = 0; n < frame_len; ++n) {
      fl[n] = x_l[m * hop + n] * window[n];
      fr[n] = x_r[m * hop + n] * window[n];
    }
    const CorrelationFunction rho = gcc_phat(Signal(std::move(fr), fs), Signal(std::move(fl), fs), opt.gcc);
    sg.values[m] = phase_spatial_correlation(rho, basis, lag_window, Exec::kSerial).values;
    sg.active[m] = true;
  });
  return sg;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) ++j;
    const bool has_left = i > 0;
    const bool has_right = j + 1 < n;
    const bool above_left = !has_left || values[i - 1] < values[i];
    const bool above_right = !has_right || values[j + 1] < values[i];
    if ((has_left || has_right) && above_left && above_right) out.push_back(i);
    i = j + 1;
  }
  return out;
}

double angular_width(const std::vector<Peak>& peaks) {
  if (peaks.size() < 2) return 0.0;
  auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return a.azimuth_deg < b.azimuth_deg;
  });
  return hi->azimuth_deg - lo->azimuth_deg;
}

WidthEstimate detect_peaks(const SpatialCorrelation& c, const PeakMode& mode) {
  require(c.azimuths.size() == c.values.size(), "spatial correlation axes mismatch");
  std::vector<Peak> candidates;
  for (std::size_t i : local_maxima(c.values)) candidates.push_back({c.azimuths[i], c.values[i]});
  // Descending value; equal values keep ascending azimuth order.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });

  WidthEstimate out;
  if (const auto* known = std::get_if<KnownCount>(&mode)) {
    require(known->count >= 1, "known source count must be at least 1");
    out.mode = "known_count";
    const std::size_t keep = std::min(candidates.size(), static_cast<std::size_t>(known->count));
    out.peaks.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
  } else {
    const auto& autom = std::get<Automatic>(mode);
    require(autom.rel_threshold > 0.0 && autom.rel_threshold < 1.0,
            "relative threshold must be in (0, 1)");
    require(autom.min_separation_deg >= 0.0, "minimum separation must be non-negative");
    out.mode = "automatic";
    if (!c.values.empty()) {
      const double global = *std::max_element(c.values.begin(), c.values.end());
      if (global > 0.0) {
        for (const auto& p : candidates) {
          if (p.value < autom.rel_threshold * global) continue;
          const bool separated = std::all_of(out.peaks.begin(), out.peaks.end(), [&](const Peak& q) {
            return std::abs(q.azimuth_deg - p.azimuth_deg) >= autom.min_separation_deg;
          });
          if (separated) out.peaks.push_back(p);
        }
      }
    }
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.azimuth_deg < b.azimuth_deg; });
  out.angular_width_deg = angular_width(out.peaks);
  return out;
}

double dispersion(const CorrelationFunction& c) {
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const double w = std::abs(c.values[i]);
    total += w;
    mean += w * (c.min_lag + static_cast<double>(i));
  }
  require(total > 0.0, "dispersion of an all-zero correlation is undefined");
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const double d = c.min_lag + static_cast<double>(i) - mean;
    var += std::abs(c.values[i]) * d * d;
  }
  return std::sqrt(var / total);
}

std::string to_csv(const SpatialCorrelation& c) {
  std::string out = "azimuth_deg,value\n";
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    out += number(c.azimuths[i]) + "," + number(c.values[i]) + "\n";
  }
  return out;
}

std::string to_csv(const Spatiogram& s) {
  std::string out = "time_s";
  for (double az : s.azimuths) out += "," + number(az);
  out += "\n";
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    out += number(s.frame_times[m]);
    for (double v : s.values[m]) out += "," + number(v);
    out += "\n";
  }
  return out;
}

std::string to_json(const WidthEstimate& w) {
  nlohmann::json doc;
  doc["peaks"] = nlohmann::json::array();
  for (const auto& p : w.peaks) doc["peaks"].push_back({{"azimuth_deg", p.azimuth_deg}, {"value", p.value}});
  doc["angular_width_deg"] = w.angular_width_deg;
  doc["mode"] = w.mode;
  return doc.dump(2);
}

}  // namespace esw::posc
