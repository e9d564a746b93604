#include "esw/render.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "esw/dsp.hpp"
#include "esw/fft.hpp"
#include "esw/random.hpp"

namespace esw::render {
namespace {

constexpr double kMaxDecorrelationSeconds = 0.03;

long max_decorrelation_delay(int sample_rate) {
  return std::lround(kMaxDecorrelationSeconds * sample_rate);
}

// Short inputs use the direct kernel, long ones the FFT path.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (h.size() <= 32 || x.size() <= 4 * h.size()) return kernels::convolve(x, h);
  return fft::convolve(x, h);
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kLocalized: return "localized";
    case ScenarioKind::kReverb: return "reverb";
    case ScenarioKind::kEnsemble: return "ensemble";
  }
  return "unknown";
}

ScenarioKind parse_kind(const std::string& name) {
  if (name == "localized") return ScenarioKind::kLocalized;
  if (name == "reverb") return ScenarioKind::kReverb;
  if (name == "ensemble") return ScenarioKind::kEnsemble;
  throw Error("unknown scenario kind '" + name + "' (expected localized, reverb or ensemble)");
}

void EnsembleSpec::validate() const {
  require(sample_rate > 0, "scenario sample rate must be positive");
  require(!sources.empty(), "scenario has no sources");
  const long bound = max_decorrelation_delay(sample_rate);
  for (const auto& s : sources) {
    require(std::isfinite(s.azimuth_deg) && s.azimuth_deg >= -90.0 && s.azimuth_deg <= 90.0,
            "source azimuth outside [-90, 90]");
    require(std::isfinite(s.gain) && s.gain >= 0.0, "source gain must be non-negative");
    require(std::labs(s.delay_samples) <= bound, "decorrelation delay exceeds +-30 ms");
  }
  switch (kind) {
    case ScenarioKind::kLocalized:
      require(sources.size() == 1 && sources[0].gain == 1.0,
              "localized scenario needs exactly one source with gain 1");
      break;
    case ScenarioKind::kReverb: {
      auto dominant = std::find_if(sources.begin(), sources.end(), [&](const SourceSpec& s) {
        return std::abs(s.azimuth_deg - center_deg) < 1e-6 && s.gain == 1.0;
      });
      require(dominant != sources.end(), "reverb scenario needs a gain-1 source at the center");
      for (auto it = sources.begin(); it != sources.end(); ++it) {
        if (it != dominant) require(it->gain <= 0.5, "reverb components must have gain <= 0.5");
      }
      break;
    }
    case ScenarioKind::kEnsemble:
      for (const auto& s : sources) {
        require(s.gain >= 0.9 && s.gain <= 1.1, "ensemble gains must lie in [0.9, 1.1]");
      }
      break;
  }
}

std::vector<double> EnsembleSpec::azimuths() const {
  std::vector<double> out;
  for (const auto& s : sources) out.push_back(s.azimuth_deg);
  return out;
}

long EnsembleSpec::max_abs_delay() const {
  long m = 0;
  for (const auto& s : sources) m = std::max(m, std::labs(s.delay_samples));
  return m;
}

std::string to_json(const EnsembleSpec& spec) {
  nlohmann::json doc;
  doc["kind"] = to_string(spec.kind);
  doc["center_deg"] = spec.center_deg;
  doc["seed"] = spec.seed;
  doc["sample_rate"] = spec.sample_rate;
  doc["sources"] = nlohmann::json::array();
  for (const auto& s : spec.sources) {
    doc["sources"].push_back(
        {{"azimuth_deg", s.azimuth_deg}, {"gain", s.gain}, {"delay_samples", s.delay_samples}});
  }
  return doc.dump(2);
}

EnsembleSpec spec_from_json(const std::string& text) {
  EnsembleSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    spec.kind = parse_kind(doc.at("kind").get<std::string>());
    spec.center_deg = doc.at("center_deg").get<double>();
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.sample_rate = doc.value("sample_rate", 48000);
    for (const auto& s : doc.at("sources")) {
      spec.sources.push_back({s.at("azimuth_deg").get<double>(), s.value("gain", 1.0),
                              s.value("delay_samples", 0L)});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("malformed scenario JSON: ") + ex.what());
  }
  spec.validate();
  return spec;
}

EnsembleSpec make_scenario(ScenarioKind kind, double center_deg, double spread_deg, int n_sources,
                           std::uint64_t seed, int sample_rate) {
  require(n_sources >= 1, "scenario needs at least one source");
  require(spread_deg >= 0.0, "spread must be non-negative");
  require(kind != ScenarioKind::kLocalized || n_sources == 1,
          "localized scenario has exactly one source");
  require(kind != ScenarioKind::kReverb || n_sources % 2 == 1,
          "reverb scenario needs an odd source count so the dominant source sits at the center");

  EnsembleSpec spec;
  spec.kind = kind;
  spec.center_deg = center_deg;
  spec.seed = seed;
  spec.sample_rate = sample_rate;

  Rng rng(seed);
  const long bound = max_decorrelation_delay(sample_rate);
  const int middle = n_sources / 2;
  for (int i = 0; i < n_sources; ++i) {
    double az = center_deg;
    if (n_sources > 1) az = center_deg - spread_deg / 2.0 + i * spread_deg / (n_sources - 1);
    az = std::round(az * 1e9) / 1e9;
    require(az >= -90.0 && az <= 90.0,
            "source at " + std::to_string(az) + " deg lies outside the bank coverage [-90, 90]");
    SourceSpec src{az, 1.0, 0};
    if (kind == ScenarioKind::kReverb && i != middle) src.gain = rng.uniform(0.2, 0.5);
    if (kind == ScenarioKind::kEnsemble) src.delay_samples = rng.uniform_int(-bound, bound);
    spec.sources.push_back(src);
  }
  spec.validate();
  return spec;
}

std::vector<Signal> decorrelate(const Signal& s, const EnsembleSpec& spec) {
  require(static_cast<double>(s.size()) * 0.1 >= static_cast<double>(spec.max_abs_delay()),
          "input too short: decorrelation delays would leave less than 90% overlap");
  std::vector<Signal> out;
  out.reserve(spec.sources.size());
  for (const auto& src : spec.sources) {
    out.push_back(delay(s, src.delay_samples, s.size()).scaled(src.gain));
  }
  return out;
}

std::vector<Signal> independent_sources(const EnsembleSpec& spec, std::size_t length,
                                        std::uint64_t seed) {
  Rng seeds(seed);
  std::vector<Signal> out;
  for (const auto& src : spec.sources) {
    out.push_back(white_noise(length, src.gain, seeds.bits(), spec.sample_rate));
  }
  return out;
}

std::vector<long> ItdScenario::lags() const {
  std::vector<long> out;
  for (std::size_t i = 0; i < right_delays.size(); ++i) out.push_back(right_delays[i] - left_delays[i]);
  return out;
}

ItdScenario ItdScenario::from_lags(const std::vector<long>& lags) {
  ItdScenario sc;
  for (long lag : lags) {
    sc.right_delays.push_back(std::max(0L, lag));
    sc.left_delays.push_back(std::max(0L, -lag));
  }
  return sc;
}

ItdScenario ItdScenario::from_head(const EnsembleSpec& spec, const hrir::SphericalHeadParams& head) {
  require(head.sample_rate == spec.sample_rate, "head model and scenario sample rates differ");
  ItdScenario sc;
  for (const auto& src : spec.sources) {
    const auto d = hrir::ear_delays(src.azimuth_deg, head);
    sc.right_delays.push_back(d.right);
    sc.left_delays.push_back(d.left);
  }
  return sc;
}

BinauralPair render_itd(const std::vector<Signal>& channels, const ItdScenario& scenario) {
  require(!channels.empty(), "no channels to render");
  require(channels.size() == scenario.right_delays.size() &&
              channels.size() == scenario.left_delays.size(),
          "channel count does not match scenario source count");
  const int fs = channels.front().sample_rate();
  std::size_t length = 0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    require(channels[i].sample_rate() == fs, "channel sample rates differ");
    require(scenario.right_delays[i] >= 0 && scenario.left_delays[i] >= 0,
            "path delays must be non-negative");
    const auto longest = static_cast<std::size_t>(
        std::max(scenario.right_delays[i], scenario.left_delays[i]));
    length = std::max(length, channels[i].size() + longest);
  }
  std::vector<double> left(length, 0.0), right(length, 0.0);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& ch = channels[i].samples();
    const auto pr = static_cast<std::size_t>(scenario.right_delays[i]);
    const auto pl = static_cast<std::size_t>(scenario.left_delays[i]);
    for (std::size_t n = 0; n < ch.size(); ++n) {
      right[n + pr] += ch[n];
      left[n + pl] += ch[n];
    }
  }
  return {Signal(std::move(left), fs), Signal(std::move(right), fs)};
}

BinauralPair render_hrir(const std::vector<Signal>& channels, const EnsembleSpec& spec,
                         const hrir::HrirBank& bank, Exec exec) {
  require(!channels.empty(), "no channels to render");
  require(channels.size() == spec.sources.size(), "channel count does not match scenario source count");
  const int fs = channels.front().sample_rate();
  require(fs == bank.sample_rate(), "HRIR bank and signal sample rates differ");
  for (const auto& ch : channels) {
    require(ch.sample_rate() == fs && ch.size() == channels.front().size(),
            "channels must share length and sample rate");
  }
  std::vector<const hrir::HrirEntry*> irs;
  for (const auto& src : spec.sources) irs.push_back(&bank.at(src.azimuth_deg));

  const std::size_t out_len = channels.front().size() + bank.ir_length() - 1;
  std::vector<std::vector<double>> lefts(channels.size()), rights(channels.size());
  for_each_index(channels.size(), exec, [&](std::size_t i) {
    lefts[i] = convolve(channels[i].view(), irs[i]->left);
    rights[i] = convolve(channels[i].view(), irs[i]->right);
  });
  std::vector<double> left(out_len, 0.0), right(out_len, 0.0);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (std::size_t n = 0; n < out_len; ++n) {
      left[n] += lefts[i][n];
      right[n] += rights[i][n];
    }
  }
  return {Signal(std::move(left), fs), Signal(std::move(right), fs)};
}

BinauralPair normalize_peak(const BinauralPair& pair, double peak) {
  double m = 0.0;
  for (double v : pair.left.samples()) m = std::max(m, std::abs(v));
  for (double v : pair.right.samples()) m = std::max(m, std::abs(v));
  require(m > 0.0, "signal has no energy");
  const double g = peak / m;
  return {pair.left.scaled(g), pair.right.scaled(g)};
}

}  // namespace esw::render
