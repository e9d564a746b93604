#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esw/hrir.hpp"
#include "esw/render.hpp"
#include "esw/signal.hpp"

namespace esw::experiment {

enum class StimulusRole { kTest, kR10, kR100, kNarrow };

std::string to_string(StimulusRole role);
StimulusRole parse_role(const std::string& name);

struct TestStimulusConfig {
  std::string id;
  // A WAV path (relative to the config file) or a built-in generator:
  // "synth:noise", "synth:tone:<hz>", "synth:harmonic:<f0 hz>",
  // "synth:clicks:<per second>".
  std::string source;
  render::ScenarioKind kind = render::ScenarioKind::kEnsemble;
  double center_deg = 0.0;
  double spread_deg = 30.0;
  int sources = 3;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  int sample_rate = 48000;
  double duration_s = 15.0;
  std::uint64_t seed = 1;
  std::optional<std::string> bank_path;   // synthetic spherical head when absent
  double grid_step_deg = 5.0;
  // Binaural stand-in for the 150 cm array: +-36 deg, i.e. atan(0.75 / 1.0)
  // per side at an assumed 1 m listening distance.
  double r100_half_span_deg = 36.0;
  int r100_sources = 6;
  double r10_cutoff_hz = 8000.0;
  double r10_upper_hz = 20000.0;
  double r100_upper_hz = 20000.0;
  double narrow_azimuth_deg = 0.0;
  int port = 8080;
  std::string results_path = "ratings.jsonl";
  std::vector<TestStimulusConfig> stimuli;
  std::filesystem::path base_dir;  // resolves relative source paths

  static ExperimentConfig from_json(const std::string& text, const std::filesystem::path& base_dir = {});
  std::string to_json() const;
};

// A small self-contained experiment: noise, tone and click-train ensembles
// at several spreads.
ExperimentConfig default_config();

struct Stimulus {
  std::string id;
  StimulusRole role = StimulusRole::kTest;
  std::string source;
  render::EnsembleSpec scenario;
  render::BinauralPair audio;  // peak-normalized to 0.9
};

struct StimulusSet {
  std::vector<Stimulus> stimuli;
  std::string r10_id;
  std::string r100_id;
  std::map<std::string, std::string> narrow_for;  // test id -> narrow id

  const Stimulus& find(const std::string& id) const;
};

hrir::HrirBank bank_for(const ExperimentConfig& config);

Signal load_source(const ExperimentConfig& config, const std::string& source, std::uint64_t seed);

// Test stimuli plus the anchors: R10 (8-20 kHz noise at the front), R100
// (band-limited noise from r100_sources independent sources spanning
// +-r100_half_span_deg, snapped to the bank grid) and one narrow
// single-source rendering per distinct source signal.
StimulusSet build_stimuli(const ExperimentConfig& config, const hrir::HrirBank& bank);

// Writes one stereo 16-bit WAV per stimulus plus stimuli.json into dir.
void write_stimuli(const StimulusSet& set, const std::filesystem::path& dir);

struct StimulusEntry {
  std::string id;
  std::string file;
  StimulusRole role = StimulusRole::kTest;
};

struct StimulusManifest {
  std::vector<StimulusEntry> entries;
  std::string r10_id;
  std::string r100_id;
  std::map<std::string, std::string> narrow_for;

  std::vector<std::string> test_ids() const;
  const StimulusEntry* find(const std::string& id) const;
};

StimulusManifest load_manifest(const std::filesystem::path& dir);

}  // namespace esw::experiment
