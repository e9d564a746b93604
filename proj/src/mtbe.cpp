#include "esw/mtbe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "esw/fft.hpp"

namespace esw::mtbe {
namespace {

std::vector<double> same_length_filter(const Signal& s, const std::vector<double>& kernel) {
  const std::vector<double> full = kernel.size() <= 64 ? kernels::convolve(s.view(), kernel)
                                                       : fft::convolve(s.view(), kernel);
  const std::size_t half = kernel.size() / 2;
  return {full.begin() + static_cast<std::ptrdiff_t>(half),
          full.begin() + static_cast<std::ptrdiff_t>(half + s.size())};
}

// Shared reduction so uniform weights reproduce the unweighted mean exactly.
double weighted_mean(const std::vector<double>& values, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) acc += (weights[k] / total) * values[k];
  return acc;
}

MtbeResult reduce(const std::vector<GaborFilterSpec>& bank, const TimeBandEnergy& tbe,
                  const std::vector<double>& weights, double floor_relative) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& row : tbe.energies) {
    for (double e : row) sum += e;
    count += row.size();
  }
  require(count > 0 && sum > 0.0, "signal has no energy");
  const double floor = floor_relative * (sum / static_cast<double>(count));

  MtbeResult r;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const auto& row = tbe.energies[k];
    double acc = 0.0;
    for (double e : row) {
      if (e < floor) ++r.floored_patches;
      acc += 10.0 * std::log10(std::max(e, floor));
    }
    r.per_filter_db.push_back(acc / static_cast<double>(row.size()));
    r.center_hz.push_back(bank[k].center_hz);
  }
  r.e_m_db = weighted_mean(r.per_filter_db, std::vector<double>(bank.size(), 1.0));
  r.e_m_w_db = weighted_mean(r.per_filter_db, weights);

  double band_sum[3] = {0, 0, 0};
  int band_n[3] = {0, 0, 0};
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const int b = static_cast<int>(bank[k].band);
    band_sum[b] += r.per_filter_db[k];
    ++band_n[b];
  }
  auto band_mean = [&](int b) { return band_n[b] ? band_sum[b] / band_n[b] : 0.0; };
  r.low_db = band_mean(0);
  r.mid_db = band_mean(1);
  r.high_db = band_mean(2);
  return r;
}

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double critical_bandwidth(double f_hz) {
  require(std::isfinite(f_hz) && f_hz > 0.0, "critical bandwidth needs a positive frequency");
  const double khz = f_hz / 1000.0;
  return 25.0 + 75.0 * std::pow(1.0 + 1.4 * khz * khz, 0.69);
}

const char* to_string(Band band) {
  switch (band) {
    case Band::kLow: return "low";
    case Band::kMid: return "mid";
    case Band::kHigh: return "high";
  }
  return "unknown";
}

std::vector<GaborFilterSpec> build_filterbank(int sample_rate, const FilterbankLayout& layout) {
  require(sample_rate > 0, "sample rate must be positive");
  require(2.0 * layout.high_end_hz <= sample_rate,
          "sample rate too low: the top filter must lie below Nyquist");
  require(layout.low_start_hz > 0.0 && layout.low_step_hz > 0.0 && layout.mid_step_hz > 0.0 &&
              layout.high_step_hz > 0.0,
          "filterbank spacings must be positive");

  std::vector<double> centers;
  std::vector<Band> bands;
  auto add_grid = [&](double start, double step, double end, Band band) {
    // Integer stepping keeps the grid free of accumulated rounding.
    for (int i = 0;; ++i) {
      const double f = start + i * step;
      if (f > end + 1e-9) break;
      centers.push_back(f);
      bands.push_back(band);
    }
  };
  add_grid(layout.low_start_hz, layout.low_step_hz, layout.low_end_hz, Band::kLow);
  add_grid(layout.low_end_hz + layout.mid_step_hz, layout.mid_step_hz, layout.mid_end_hz, Band::kMid);
  add_grid(layout.mid_end_hz + layout.high_step_hz, layout.high_step_hz, layout.high_end_hz, Band::kHigh);

  std::vector<GaborFilterSpec> bank;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    GaborFilterSpec f;
    f.center_hz = centers[k];
    f.time_spread_s = 1.0 / critical_bandwidth(centers[k]);
    const double spread_samples = f.time_spread_s * sample_rate;
    f.window_length = 2 * static_cast<std::size_t>(std::lround(3.0 * spread_samples)) + 1;
    f.patch_length = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spread_samples)));
    f.band = bands[k];
    bank.push_back(f);
  }
  return bank;
}

std::vector<double> gabor_kernel(const GaborFilterSpec& spec, int sample_rate) {
  const auto half = static_cast<long>(spec.window_length / 2);
  std::vector<double> w(spec.window_length);
  const double inv_two_var = 1.0 / (2.0 * spec.time_spread_s * spec.time_spread_s);
  const double omega = 2.0 * std::numbers::pi * spec.center_hz;
  for (long j = -half; j <= half; ++j) {
    const double t = static_cast<double>(j) / sample_rate;
    w[static_cast<std::size_t>(j + half)] = std::exp(-t * t * inv_two_var) * std::cos(omega * t);
  }
  return w;
}

TimeBandEnergy patch_energies(const Signal& s, const std::vector<GaborFilterSpec>& bank, Exec exec) {
  require(!bank.empty(), "empty filterbank");
  std::size_t longest = 0;
  for (const auto& f : bank) longest = std::max(longest, f.patch_length);
  require(s.size() >= longest, "signal shorter than one patch of the lowest-frequency filter");

  TimeBandEnergy out;
  out.energies.resize(bank.size());
  for (const auto& f : bank) out.patch_lengths.push_back(f.patch_length);
  for_each_index(bank.size(), exec, [&](std::size_t k) {
    const std::vector<double> y = same_length_filter(s, gabor_kernel(bank[k], s.sample_rate()));
    out.energies[k] = kernels::reference::block_energies(y, bank[k].patch_length);
  });
  return out;
}

std::vector<double> band_weights(const std::vector<GaborFilterSpec>& bank, const BandWeights& w) {
  std::vector<double> out;
  for (const auto& f : bank) {
    out.push_back(f.band == Band::kLow ? w.low : f.band == Band::kMid ? w.mid : w.high);
  }
  return out;
}

MtbeResult mtbe(const Signal& s, const MtbeOptions& opt, Exec exec) {
  const auto bank = build_filterbank(s.sample_rate(), opt.layout);
  return mtbe_weighted(s, band_weights(bank), opt, exec);
}

MtbeResult mtbe_weighted(const Signal& s, const std::vector<double>& weights, const MtbeOptions& opt,
                         Exec exec) {
  require(opt.floor_relative > 0.0, "energy floor must be positive");
  const auto bank = build_filterbank(s.sample_rate(), opt.layout);
  require(weights.size() == bank.size(),
          "weight count " + std::to_string(weights.size()) + " does not match filter count " +
              std::to_string(bank.size()));
  for (double w : weights) require(std::isfinite(w) && w > 0.0, "filter weights must be positive");
  require(s.energy() > 0.0, "signal has no energy");
  return reduce(bank, patch_energies(s, bank, exec), weights, opt.floor_relative);
}

std::map<std::string, double> relative_scores(const std::map<std::string, double>& values_db,
                                              double reference_max_percent) {
  require(!values_db.empty(), "no values to score");
  require(reference_max_percent > 0.0, "reference maximum must be positive");
  double vmax = values_db.begin()->second;
  for (const auto& [name, v] : values_db) vmax = std::max(vmax, v);
  std::map<std::string, double> out;
  for (const auto& [name, v] : values_db) {
    out[name] = reference_max_percent * std::pow(10.0, (v - vmax) / 20.0);
  }
  return out;
}

std::string to_json(const MtbeResult& r) {
  nlohmann::json doc;
  doc["e_m_db"] = r.e_m_db;
  doc["e_m_w_db"] = r.e_m_w_db;
  doc["bands"] = {{"low", r.low_db}, {"mid", r.mid_db}, {"high", r.high_db}};
  doc["k"] = r.per_filter_db.size();
  doc["per_filter"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.per_filter_db.size(); ++k) {
    doc["per_filter"].push_back({{"center_hz", r.center_hz[k]}, {"mean_db", r.per_filter_db[k]}});
  }
  return doc.dump(2);
}

std::string per_filter_csv(const MtbeResult& r) {
  std::string out = "center_hz,mean_db\n";
  for (std::size_t k = 0; k < r.per_filter_db.size(); ++k) {
    out += number(r.center_hz[k]) + "," + number(r.per_filter_db[k]) + "\n";
  }
  return out;
}

}  // namespace esw::mtbe
