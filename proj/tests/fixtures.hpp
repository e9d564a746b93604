#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "esw/experiment.hpp"

namespace fixtures {

// Fresh, unique directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("esw_" + tag + "_" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

// Short four-stimulus experiment, fast enough for unit tests.
inline esw::experiment::ExperimentConfig small_config() {
  esw::experiment::ExperimentConfig c;
  c.duration_s = 1.0;
  c.seed = 5;
  c.stimuli = {
      {"noise_w10", "synth:noise", esw::render::ScenarioKind::kEnsemble, 0.0, 10.0, 3, 1},
      {"noise_w30", "synth:noise", esw::render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 2},
      {"harmonic_w30", "synth:harmonic:220", esw::render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 3},
      {"clicks_w20", "synth:clicks:4", esw::render::ScenarioKind::kEnsemble, 10.0, 20.0, 3, 4},
  };
  return c;
}

inline std::filesystem::path write_small_stimuli(const std::string& tag) {
  const auto dir = temp_dir(tag);
  const auto cfg = small_config();
  esw::experiment::write_stimuli(esw::experiment::build_stimuli(cfg, esw::experiment::bank_for(cfg)), dir);
  return dir;
}

}  // namespace fixtures
