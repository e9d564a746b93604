#include "esw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "esw/dsp.hpp"
#include "esw/random.hpp"
#include "esw/wav.hpp"

namespace esw::experiment {
namespace {

using nlohmann::json;

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v) && v > 0.0) return v;
  } catch (const std::exception&) {
  }
  throw Error("invalid " + what + " in source spec: '" + text + "'");
}

Signal harmonic_tone(std::size_t n, int fs, double f0) {
  std::vector<double> x(n, 0.0);
  const double top = std::min(12000.0, 0.45 * fs);
  for (int h = 1; h * f0 <= top; ++h) {
    const double w = 2.0 * std::numbers::pi * h * f0 / fs;
    for (std::size_t i = 0; i < n; ++i) x[i] += std::sin(w * static_cast<double>(i)) / h;
  }
  return Signal(std::move(x), fs);
}

Signal pure_tone(std::size_t n, int fs, double f) {
  std::vector<double> x(n);
  const double w = 2.0 * std::numbers::pi * f / fs;
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * std::sin(w * static_cast<double>(i));
  return Signal(std::move(x), fs);
}

// Decaying 5 ms noise bursts at a fixed rate, a percussive stand-in.
Signal click_train(std::size_t n, int fs, double rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n, 0.0);
  const auto period = static_cast<std::size_t>(std::lround(fs / rate));
  const auto burst = static_cast<std::size_t>(std::lround(0.005 * fs));
  for (std::size_t start = 0; start < n; start += std::max<std::size_t>(period, 1)) {
    for (std::size_t i = 0; i < burst && start + i < n; ++i) {
      x[start + i] = rng.gaussian() * std::exp(-static_cast<double>(i) / (0.2 * burst));
    }
  }
  return Signal(std::move(x), fs);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

Stimulus render_stimulus(std::string id, StimulusRole role, std::string source,
                         const render::EnsembleSpec& spec, const std::vector<Signal>& channels,
                         const hrir::HrirBank& bank) {
  auto pair = render::render_hrir(channels, spec, bank);
  return {std::move(id), role, std::move(source), spec, render::normalize_peak(pair, 0.9)};
}

}  // namespace

std::string to_string(StimulusRole role) {
  switch (role) {
    case StimulusRole::kTest: return "test";
    case StimulusRole::kR10: return "r10";
    case StimulusRole::kR100: return "r100";
    case StimulusRole::kNarrow: return "narrow";
  }
  return "unknown";
}

StimulusRole parse_role(const std::string& name) {
  if (name == "test") return StimulusRole::kTest;
  if (name == "r10") return StimulusRole::kR10;
  if (name == "r100") return StimulusRole::kR100;
  if (name == "narrow") return StimulusRole::kNarrow;
  throw Error("unknown stimulus role '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    const json doc = json::parse(text);
    c.sample_rate = doc.value("sample_rate", c.sample_rate);
    c.duration_s = doc.value("duration_s", c.duration_s);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("bank") && !doc["bank"].is_null()) c.bank_path = doc["bank"].get<std::string>();
    c.grid_step_deg = doc.value("grid_step_deg", c.grid_step_deg);
    c.r100_half_span_deg = doc.value("r100_half_span_deg", c.r100_half_span_deg);
    c.r100_sources = doc.value("r100_sources", c.r100_sources);
    c.r10_cutoff_hz = doc.value("r10_cutoff_hz", c.r10_cutoff_hz);
    c.r10_upper_hz = doc.value("r10_upper_hz", c.r10_upper_hz);
    c.r100_upper_hz = doc.value("r100_upper_hz", c.r100_upper_hz);
    c.narrow_azimuth_deg = doc.value("narrow_azimuth_deg", c.narrow_azimuth_deg);
    c.port = doc.value("port", c.port);
    c.results_path = doc.value("results_path", c.results_path);
    for (const auto& s : doc.at("stimuli")) {
      TestStimulusConfig t;
      t.id = s.at("id").get<std::string>();
      t.source = s.at("source").get<std::string>();
      t.kind = render::parse_kind(s.value("kind", std::string("ensemble")));
      t.center_deg = s.value("center_deg", t.center_deg);
      t.spread_deg = s.value("spread_deg", t.spread_deg);
      t.sources = s.value("sources", t.sources);
      t.seed = s.value("seed", t.seed);
      c.stimuli.push_back(std::move(t));
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed experiment config: ") + ex.what());
  }
  require(c.sample_rate > 0, "config sample_rate must be positive");
  require(c.duration_s > 0.0, "config duration_s must be positive");
  require(!c.stimuli.empty(), "config lists no test stimuli");
  std::set<std::string> ids;
  for (const auto& s : c.stimuli) {
    require(!s.id.empty(), "stimulus id must not be empty");
    require(ids.insert(s.id).second, "duplicate stimulus id '" + s.id + "'");
  }
  return c;
}

std::string ExperimentConfig::to_json() const {
  json doc;
  doc["sample_rate"] = sample_rate;
  doc["duration_s"] = duration_s;
  doc["seed"] = seed;
  doc["bank"] = bank_path ? json(*bank_path) : json(nullptr);
  doc["grid_step_deg"] = grid_step_deg;
  doc["r100_half_span_deg"] = r100_half_span_deg;
  doc["r100_sources"] = r100_sources;
  doc["r10_cutoff_hz"] = r10_cutoff_hz;
  doc["r10_upper_hz"] = r10_upper_hz;
  doc["r100_upper_hz"] = r100_upper_hz;
  doc["narrow_azimuth_deg"] = narrow_azimuth_deg;
  doc["port"] = port;
  doc["results_path"] = results_path;
  doc["stimuli"] = json::array();
  for (const auto& s : stimuli) {
    doc["stimuli"].push_back({{"id", s.id},
                              {"source", s.source},
                              {"kind", render::to_string(s.kind)},
                              {"center_deg", s.center_deg},
                              {"spread_deg", s.spread_deg},
                              {"sources", s.sources},
                              {"seed", s.seed}});
  }
  return doc.dump(2);
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.stimuli = {
      {"noise_w10", "synth:noise", render::ScenarioKind::kEnsemble, 0.0, 10.0, 3, 11},
      {"noise_w30", "synth:noise", render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 12},
      {"noise_w60", "synth:noise", render::ScenarioKind::kEnsemble, 0.0, 60.0, 3, 13},
      {"harmonic_w30", "synth:harmonic:220", render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 14},
      {"clicks_w30", "synth:clicks:4", render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 15},
  };
  return c;
}

const Stimulus& StimulusSet::find(const std::string& id) const {
  auto it = std::find_if(stimuli.begin(), stimuli.end(), [&](const Stimulus& s) { return s.id == id; });
  require(it != stimuli.end(), "unknown stimulus '" + id + "'");
  return *it;
}

hrir::HrirBank bank_for(const ExperimentConfig& config) {
  if (config.bank_path) {
    std::filesystem::path p(*config.bank_path);
    if (p.is_relative()) p = config.base_dir / p;
    auto bank = hrir::load_bank(p);
    require(bank.sample_rate() == config.sample_rate, "HRIR bank sample rate differs from config");
    return bank;
  }
  hrir::SphericalHeadParams head;
  head.grid_step_deg = config.grid_step_deg;
  head.sample_rate = config.sample_rate;
  return hrir::synth_spherical_bank(head);
}

Signal load_source(const ExperimentConfig& config, const std::string& source, std::uint64_t seed) {
  const int fs = config.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(config.duration_s * fs));
  if (source.rfind("synth:", 0) == 0) {
    const auto parts = split(source, ':');
    const std::string& kind = parts.size() > 1 ? parts[1] : std::string();
    if (kind == "noise" && parts.size() == 2) return white_noise(n, 0.25, seed, fs);
    if (kind == "tone" && parts.size() == 3) return pure_tone(n, fs, parse_number(parts[2], "frequency"));
    if (kind == "harmonic" && parts.size() == 3) {
      return harmonic_tone(n, fs, parse_number(parts[2], "fundamental"));
    }
    if (kind == "clicks" && parts.size() == 3) {
      return click_train(n, fs, parse_number(parts[2], "click rate"), seed);
    }
    throw Error("unknown built-in source '" + source + "'");
  }
  std::filesystem::path p(source);
  if (p.is_relative()) p = config.base_dir / p;
  const auto audio = wav::read(p);
  require(audio.sample_rate == fs, "source " + p.string() + " is not at the configured sample rate");
  return audio.channels.front();
}

StimulusSet build_stimuli(const ExperimentConfig& config, const hrir::HrirBank& bank) {
  require(bank.sample_rate() == config.sample_rate, "HRIR bank sample rate differs from config");
  const int fs = config.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(config.duration_s * fs));
  StimulusSet set;
  Rng seeds(config.seed);

  // Anchors first: their seeds must not depend on the test list.
  const std::uint64_t r10_seed = seeds.bits();
  const std::uint64_t r100_seed = seeds.bits();

  {
    auto spec = render::make_scenario(render::ScenarioKind::kLocalized, 0.0, 0.0, 1, r10_seed, fs);
    require(bank.index_of(0.0).has_value(), "HRIR bank lacks the 0 deg azimuth needed for R10");
    const Signal noise = band_limit(white_noise(n, 0.25, r10_seed, fs), config.r10_cutoff_hz,
                                    config.r10_upper_hz);
    set.stimuli.push_back(render_stimulus("r10", StimulusRole::kR10, "noise", spec, {noise}, bank));
    set.r10_id = "r10";
  }
  {
    require(config.r100_sources >= 2, "R100 needs at least two sources");
    auto spec = render::make_scenario(render::ScenarioKind::kEnsemble, 0.0,
                                      2.0 * config.r100_half_span_deg, config.r100_sources, r100_seed, fs);
    const auto grid = bank.azimuths();
    std::set<double> used;
    for (auto& src : spec.sources) {
      src.delay_samples = 0;
      auto nearest = std::min_element(grid.begin(), grid.end(), [&](double a, double b) {
        return std::abs(a - src.azimuth_deg) < std::abs(b - src.azimuth_deg);
      });
      src.azimuth_deg = *nearest;
      require(used.insert(src.azimuth_deg).second,
              "HRIR bank grid too coarse for distinct R100 source positions");
    }
    auto channels = render::independent_sources(spec, n, r100_seed);
    for (auto& ch : channels) ch = band_limit(ch.scaled(0.25), 0.0, config.r100_upper_hz);
    set.stimuli.push_back(render_stimulus("r100", StimulusRole::kR100, "noise", spec, channels, bank));
    set.r100_id = "r100";
  }

  std::map<std::string, std::string> narrow_by_source;
  for (const auto& t : config.stimuli) {
    require(t.id != "r10" && t.id != "r100" && t.id.rfind("ns_", 0) != 0,
            "stimulus id '" + t.id + "' is reserved");
    const std::uint64_t source_seed = seeds.bits();
    const Signal s = load_source(config, t.source, source_seed);
    const auto spec = render::make_scenario(t.kind, t.center_deg, t.spread_deg, t.sources, t.seed, fs);
    set.stimuli.push_back(
        render_stimulus(t.id, StimulusRole::kTest, t.source, spec, render::decorrelate(s, spec), bank));

    auto [it, inserted] = narrow_by_source.emplace(t.source, "ns_" + std::to_string(narrow_by_source.size() + 1));
    if (inserted) {
      auto narrow = render::make_scenario(render::ScenarioKind::kLocalized, config.narrow_azimuth_deg, 0.0, 1,
                                          t.seed, fs);
      set.stimuli.push_back(render_stimulus(it->second, StimulusRole::kNarrow, t.source, narrow, {s}, bank));
    }
    set.narrow_for[t.id] = it->second;
  }
  return set;
}

void write_stimuli(const StimulusSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["r10_id"] = set.r10_id;
  manifest["r100_id"] = set.r100_id;
  manifest["narrow_for"] = set.narrow_for;
  manifest["stimuli"] = json::array();
  for (const auto& s : set.stimuli) {
    const std::string file = s.id + ".wav";
    wav::write(dir / file, {s.audio.left, s.audio.right}, wav::SampleFormat::kPcm16);
    manifest["stimuli"].push_back({{"id", s.id},
                                   {"file", file},
                                   {"role", to_string(s.role)},
                                   {"source", s.source},
                                   {"scenario", json::parse(render::to_json(s.scenario))}});
  }
  std::ofstream out(dir / "stimuli.json", std::ios::trunc);
  require(out.good(), "cannot write stimulus manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

std::vector<std::string> StimulusManifest::test_ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.role == StimulusRole::kTest) out.push_back(e.id);
  }
  return out;
}

const StimulusEntry* StimulusManifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

StimulusManifest load_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "stimuli.json");
  require(in.good(), "cannot open stimulus manifest in " + dir.string());
  StimulusManifest m;
  try {
    const json doc = json::parse(in);
    m.r10_id = doc.at("r10_id").get<std::string>();
    m.r100_id = doc.at("r100_id").get<std::string>();
    m.narrow_for = doc.at("narrow_for").get<std::map<std::string, std::string>>();
    for (const auto& s : doc.at("stimuli")) {
      m.entries.push_back({s.at("id").get<std::string>(), s.at("file").get<std::string>(),
                           parse_role(s.at("role").get<std::string>())});
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed stimulus manifest: ") + ex.what());
  }
  require(!m.test_ids().empty(), "stimulus manifest has no test stimuli");
  return m;
}

}  // namespace esw::experiment
