// Command-line front end: bank synthesis, rendering, POSC / spatiogram / MTBE
// analysis, stimulus generation and the listening-test service.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "esw/dsp.hpp"
#include "esw/experiment.hpp"
#include "esw/hrir.hpp"
#include "esw/mtbe.hpp"
#include "esw/posc.hpp"
#include "esw/random.hpp"
#include "esw/ratings.hpp"
#include "esw/render.hpp"
#include "esw/service.hpp"
#include "esw/wav.hpp"

namespace {

using namespace esw;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to a file, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  require(out.good(), "write to " + path + " failed");
}

hrir::HrirBank bank_or_synthetic(const std::string& path, double grid, int sample_rate) {
  if (!path.empty()) {
    auto bank = hrir::load_bank(path);
    require(bank.sample_rate() == sample_rate, "HRIR bank sample rate " + std::to_string(bank.sample_rate()) +
                                                   " differs from the audio's " + std::to_string(sample_rate));
    return bank;
  }
  hrir::SphericalHeadParams p;
  p.grid_step_deg = grid;
  p.sample_rate = sample_rate;
  return hrir::synth_spherical_bank(p);
}

render::BinauralPair read_stereo(const std::string& path) {
  auto audio = wav::read(path);
  require(audio.channels.size() == 2, path + " is not a stereo WAV");
  return {audio.channels[0], audio.channels[1]};
}

Signal read_mono(const std::string& path, int channel) {
  auto audio = wav::read(path);
  require(channel >= 0 && static_cast<std::size_t>(channel) < audio.channels.size(),
          path + " has no channel " + std::to_string(channel));
  return audio.channels[static_cast<std::size_t>(channel)];
}

wav::SampleFormat format_of(bool as_float) {
  return as_float ? wav::SampleFormat::kFloat32 : wav::SampleFormat::kPcm16;
}

experiment::ExperimentConfig read_config(const std::string& path) {
  if (path.empty()) return experiment::default_config();
  return experiment::ExperimentConfig::from_json(read_text(path),
                                                 std::filesystem::absolute(path).parent_path());
}

esw::service::ExperimentService* g_service = nullptr;

void handle_stop(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble source width analysis and listening-test tools"};
  app.require_subcommand(1);

  // synth-hrir
  auto* synth = app.add_subcommand("synth-hrir", "Write a synthetic spherical-head HRIR bank as JSON");
  hrir::SphericalHeadParams head;
  std::string synth_out;
  synth->add_option("--grid", head.grid_step_deg, "Azimuth step in degrees (0, 30]")->capture_default_str();
  synth->add_option("--fs", head.sample_rate, "Sample rate")->capture_default_str();
  synth->add_option("--radius", head.head_radius_m, "Head radius in meters")->capture_default_str();
  synth->add_option("--speed", head.speed_of_sound, "Speed of sound in m/s")->capture_default_str();
  synth->add_option("--ir-length", head.ir_length, "Impulse response length")->capture_default_str();
  synth->add_option("-o,--output", synth_out, "Output path (stdout if omitted)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a mono source signal");
  std::string gen_source = "synth:noise", gen_out;
  double gen_seconds = 15.0;
  int gen_fs = 48000;
  std::uint64_t gen_seed = 1;
  bool gen_float = false;
  gen->add_option("--source", gen_source, "synth:noise | synth:tone:<hz> | synth:harmonic:<hz> | synth:clicks:<rate>")
      ->capture_default_str();
  gen->add_option("--seconds", gen_seconds, "Duration")->capture_default_str();
  gen->add_option("--fs", gen_fs, "Sample rate")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_flag("--float", gen_float, "Write 32-bit float samples");
  gen->add_option("-o,--output", gen_out, "Output WAV")->required();

  // render
  auto* rend = app.add_subcommand("render", "Render a source ensemble binaurally");
  std::string r_scenario, r_kind = "ensemble", r_input, r_bank, r_model = "hrir", r_out, r_emit;
  double r_center = 0.0, r_spread = 30.0, r_seconds = 10.0, r_grid = 5.0, r_peak = 0.9;
  int r_sources = 3, r_fs = 48000;
  std::uint64_t r_seed = 1;
  bool r_float = false;
  rend->add_option("--scenario", r_scenario, "Scenario JSON (overrides --kind/--center/...)");
  rend->add_option("--kind", r_kind, "localized | reverb | ensemble")->capture_default_str();
  rend->add_option("--center", r_center, "Center azimuth in degrees")->capture_default_str();
  rend->add_option("--spread", r_spread, "Angular spread in degrees")->capture_default_str();
  rend->add_option("--sources", r_sources, "Number of sources")->capture_default_str();
  rend->add_option("--seed", r_seed, "Random seed")->capture_default_str();
  rend->add_option("--fs", r_fs, "Sample rate when no input is given")->capture_default_str();
  rend->add_option("--input", r_input, "Mono source WAV; independent white noise per source if omitted");
  rend->add_option("--seconds", r_seconds, "Noise duration when no input is given")->capture_default_str();
  rend->add_option("--bank", r_bank, "HRIR bank JSON (synthetic spherical head if omitted)");
  rend->add_option("--grid", r_grid, "Synthetic bank azimuth step")->capture_default_str();
  rend->add_option("--model", r_model, "hrir | itd")->capture_default_str();
  rend->add_option("--peak", r_peak, "Output peak level; 0 disables normalization")->capture_default_str();
  rend->add_option("--emit-scenario", r_emit, "Also write the scenario JSON here");
  rend->add_flag("--float", r_float, "Write 32-bit float samples");
  rend->add_option("-o,--output", r_out, "Output stereo WAV")->required();

  // analyze-posc
  auto* ana = app.add_subcommand("analyze-posc", "Spatial correlation and width estimate of a stereo WAV");
  std::string a_input, a_bank, a_csv, a_json;
  double a_grid = 5.0, a_threshold = 0.5, a_min_sep = 10.0;
  int a_sources = 0, a_window = -1;
  bool a_magnitude = false;
  ana->add_option("input", a_input, "Stereo WAV (left, right)")->required();
  ana->add_option("--bank", a_bank, "HRIR bank JSON (synthetic spherical head if omitted)");
  ana->add_option("--grid", a_grid, "Synthetic bank azimuth step")->capture_default_str();
  ana->add_option("--sources", a_sources, "Known source count (automatic peak picking if omitted)");
  ana->add_option("--threshold", a_threshold, "Automatic mode: fraction of the global maximum")->capture_default_str();
  ana->add_option("--min-separation", a_min_sep, "Automatic mode: minimum peak spacing in degrees")
      ->capture_default_str();
  ana->add_option("--lag-window", a_window, "Projection half-width in samples (default 1 ms)");
  ana->add_flag("--magnitude", a_magnitude, "Use magnitude cross-correlation instead of GCC-PHAT");
  ana->add_option("--csv", a_csv, "Spatial correlation CSV output");
  ana->add_option("--width-json", a_json, "Width estimate JSON output (stdout if omitted)");

  // spatiogram
  auto* spg = app.add_subcommand("spatiogram", "Frame-wise POSC of a stereo WAV");
  std::string s_input, s_bank, s_out;
  double s_grid = 5.0;
  posc::SpatiogramOptions s_opt;
  spg->add_option("input", s_input, "Stereo WAV (left, right)")->required();
  spg->add_option("--bank", s_bank, "HRIR bank JSON (synthetic spherical head if omitted)");
  spg->add_option("--grid", s_grid, "Synthetic bank azimuth step")->capture_default_str();
  spg->add_option("--frame-ms", s_opt.frame_ms, "Frame length in ms")->capture_default_str();
  spg->add_option("--overlap", s_opt.overlap, "Frame overlap fraction")->capture_default_str();
  spg->add_option("--silence-db", s_opt.silence_db, "Silent-frame threshold below the loudest frame")
      ->capture_default_str();
  spg->add_option("--lag-window", s_opt.lag_window, "Projection half-width in samples (default 1 ms)");
  spg->add_option("-o,--output", s_out, "CSV output (stdout if omitted)");

  // mtbe
  auto* mt = app.add_subcommand("mtbe", "Mean time-band energy of a WAV channel");
  std::string m_input, m_out, m_csv;
  int m_channel = 0;
  mtbe::MtbeOptions m_opt;
  std::vector<double> m_weights;
  mt->add_option("input", m_input, "WAV file")->required();
  mt->add_option("--channel", m_channel, "Channel to analyze")->capture_default_str();
  mt->add_option("--floor", m_opt.floor_relative, "Energy floor relative to the mean patch energy")
      ->capture_default_str();
  mt->add_option("--weights", m_weights, "Band weights low,mid,high (default 1,0.5,1)")
      ->delimiter(',')
      ->expected(3);
  mt->add_option("--csv", m_csv, "Per-filter CSV output");
  mt->add_option("-o,--output", m_out, "JSON output (stdout if omitted)");

  // make-stimuli
  auto* mk = app.add_subcommand("make-stimuli", "Render test stimuli and references from a config");
  std::string k_config, k_out, k_dump;
  mk->add_option("--config", k_config, "Experiment config JSON (built-in default if omitted)");
  mk->add_option("--dump-config", k_dump, "Write the effective config JSON here");
  mk->add_option("-o,--output", k_out, "Output directory")->required();

  // serve
  auto* sv = app.add_subcommand("serve", "Run the listening-test HTTP service");
  std::string v_stimuli, v_results, v_host = "127.0.0.1", v_ui, v_config;
  int v_port = -1;
  std::uint64_t v_seed = 1;
  sv->add_option("--stimuli", v_stimuli, "Directory written by make-stimuli")->required();
  sv->add_option("--results", v_results, "Ratings log path (config results_path if omitted)");
  sv->add_option("--config", v_config, "Experiment config JSON supplying port and results path");
  sv->add_option("--host", v_host, "Listen address")->capture_default_str();
  sv->add_option("--port", v_port, "Listen port (config port if omitted; 0 picks a free port)");
  sv->add_option("--seed", v_seed, "Seed for stimulus permutations")->capture_default_str();
  sv->add_option("--ui", v_ui, "Static UI directory served at /");

  // correlate
  auto* cor = app.add_subcommand("correlate", "Rank-correlate listener ratings with MTBE scores");
  std::string c_ratings, c_scores, c_out;
  double c_ref = 100.0;
  std::size_t c_min = 3;
  cor->add_option("--ratings", c_ratings, "Ratings log (JSONL)")->required();
  cor->add_option("--scores", c_scores, "JSON object mapping stimulus id to MTBE value in dB")->required();
  cor->add_option("--reference-max", c_ref, "Relative score given to the largest MTBE value")
      ->capture_default_str();
  cor->add_option("--min-common", c_min, "Minimum stimuli shared per listener")->capture_default_str();
  cor->add_option("-o,--output", c_out, "JSON output (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      emit(synth_out, hrir::serialize_bank(hrir::synth_spherical_bank(head)));
    } else if (*gen) {
      experiment::ExperimentConfig cfg;
      cfg.sample_rate = gen_fs;
      cfg.duration_s = gen_seconds;
      cfg.base_dir = std::filesystem::current_path();
      require(gen_source.rfind("synth:", 0) == 0, "gen only produces built-in synth: sources");
      wav::write(gen_out, {experiment::load_source(cfg, gen_source, gen_seed)}, format_of(gen_float));
    } else if (*rend) {
      render::EnsembleSpec spec;
      std::optional<Signal> input;
      if (!r_input.empty()) input = read_mono(r_input, 0);
      const int fs = input ? input->sample_rate() : r_fs;
      if (!r_scenario.empty()) {
        spec = render::spec_from_json(read_text(r_scenario));
        require(spec.sample_rate == fs, "scenario sample rate differs from the input's");
      } else {
        spec = render::make_scenario(render::parse_kind(r_kind), r_center, r_spread, r_sources, r_seed, fs);
      }
      std::vector<Signal> channels;
      if (input) {
        channels = render::decorrelate(*input, spec);
      } else {
        require(r_seconds > 0.0, "--seconds must be positive");
        channels = render::independent_sources(spec, static_cast<std::size_t>(std::lround(r_seconds * fs)), spec.seed);
      }
      auto pair = [&]() -> render::BinauralPair {
        if (r_model == "hrir") return render::render_hrir(channels, spec, bank_or_synthetic(r_bank, r_grid, fs));
        require(r_model == "itd", "unknown model '" + r_model + "' (expected hrir or itd)");
        hrir::SphericalHeadParams p;
        p.sample_rate = fs;
        return render::render_itd(channels, render::ItdScenario::from_head(spec, p));
      }();
      if (r_peak > 0.0) pair = render::normalize_peak(pair, r_peak);
      wav::write(r_out, {pair.left, pair.right}, format_of(r_float));
      if (!r_emit.empty()) emit(r_emit, render::to_json(spec));
    } else if (*ana) {
      const auto pair = read_stereo(a_input);
      const int fs = pair.left.sample_rate();
      const auto bank = bank_or_synthetic(a_bank, a_grid, fs);
      const int window = a_window < 0 ? posc::default_lag_window(fs) : a_window;
      posc::SpatialCorrelation c;
      if (a_magnitude) {
        const auto basis = hrir::magnitude_basis(bank, window);
        c = posc::spatial_correlation(cross_correlation(pair.right, pair.left, window), basis, window);
      } else {
        c = posc::posc_of_pair(pair.left, pair.right, hrir::phase_basis(bank), window);
      }
      posc::PeakMode mode = posc::Automatic{a_threshold, a_min_sep};
      if (a_sources > 0) mode = posc::KnownCount{a_sources};
      if (!a_csv.empty()) emit(a_csv, posc::to_csv(c));
      emit(a_json, posc::to_json(posc::detect_peaks(c, mode)));
    } else if (*spg) {
      const auto pair = read_stereo(s_input);
      const auto bank = bank_or_synthetic(s_bank, s_grid, pair.left.sample_rate());
      emit(s_out, posc::to_csv(posc::spatiogram(pair.left, pair.right, hrir::phase_basis(bank), s_opt)));
    } else if (*mt) {
      const Signal s = read_mono(m_input, m_channel);
      mtbe::MtbeResult r;
      if (m_weights.empty()) {
        r = mtbe::mtbe(s, m_opt);
      } else {
        const auto bank = mtbe::build_filterbank(s.sample_rate(), m_opt.layout);
        r = mtbe::mtbe_weighted(s, mtbe::band_weights(bank, {m_weights[0], m_weights[1], m_weights[2]}), m_opt);
      }
      if (!m_csv.empty()) emit(m_csv, mtbe::per_filter_csv(r));
      emit(m_out, mtbe::to_json(r));
    } else if (*mk) {
      const auto cfg = read_config(k_config);
      if (!k_dump.empty()) emit(k_dump, cfg.to_json());
      const auto set = experiment::build_stimuli(cfg, experiment::bank_for(cfg));
      experiment::write_stimuli(set, k_out);
      std::cerr << "wrote " << set.stimuli.size() << " stimuli to " << k_out << '\n';
    } else if (*sv) {
      const auto cfg = read_config(v_config);
      std::filesystem::path results = v_results;
      if (results.empty()) {
        results = cfg.results_path;
        if (results.is_relative()) results = cfg.base_dir / results;
      }
      service::ExperimentService svc({v_stimuli, results, v_seed,
                                      v_ui.empty() ? std::nullopt : std::optional<std::filesystem::path>(v_ui)});
      const int port = svc.bind(v_host, v_port < 0 ? cfg.port : v_port);
      std::cerr << "serving " << svc.manifest().test_ids().size() << " test stimuli on http://" << v_host << ':'
                << port << " (ratings: " << results.string() << ")\n";
      g_service = &svc;
      std::signal(SIGINT, handle_stop);
      std::signal(SIGTERM, handle_stop);
      svc.run();
      g_service = nullptr;
    } else if (*cor) {
      const auto doc = nlohmann::json::parse(read_text(c_scores));
      require(doc.is_object(), "scores file must be a JSON object of stimulus id -> dB");
      std::map<std::string, double> values;
      for (const auto& [id, v] : doc.items()) {
        require(v.is_number(), "score for " + id + " is not a number");
        values[id] = v.get<double>();
      }
      const auto report =
          ratings::correlate_scores(ratings::load_ratings(c_ratings), mtbe::relative_scores(values, c_ref), c_min);
      emit(c_out, ratings::to_json(report));
    }
  } catch (const nlohmann::json::exception& ex) {
    std::fprintf(stderr, "esw: error: malformed JSON: %s\n", ex.what());
    return 1;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "esw: error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
