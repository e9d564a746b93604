#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "esw/experiment.hpp"
#include "esw/random.hpp"
#include "esw/ratings.hpp"

namespace httplib {
class Server;
}

namespace esw::service {

struct ServiceOptions {
  std::filesystem::path stimulus_dir;  // output of make-stimuli
  std::filesystem::path results_path;  // ratings log
  std::uint64_t seed = 1;              // drives the per-session permutations
  std::optional<std::filesystem::path> ui_dir;  // static files served at /
};

// HTTP experiment service:
//   POST /api/session {listener_id}             -> 201 session descriptor
//   GET  /api/stimulus/{session_id}/{stimulus}  -> 200 audio/wav
//   POST /api/rating {session_id, stimulus_id, score} -> 204
//   GET  /api/results                           -> 200 {ratings: [...]}
// Errors: 400 malformed body, 404 unknown session or stimulus, 422 score
// outside [0, 120]. Error bodies are {"error": message}.
class ExperimentService {
 public:
  explicit ExperimentService(ServiceOptions options);
  ~ExperimentService();
  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop(); blocks.
  void run();
  // run() on a background thread; returns once the server accepts requests.
  void start();
  void stop();

  ratings::Session create_session(const std::string& listener_id);
  const experiment::StimulusManifest& manifest() const { return manifest_; }
  const ratings::RatingStore& store() const { return store_; }

 private:
  void install_routes();

  ServiceOptions options_;
  experiment::StimulusManifest manifest_;
  std::map<std::string, std::string> audio_;  // stimulus id -> WAV bytes
  ratings::RatingStore store_;
  std::mutex rng_mutex_;
  Rng rng_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  bool bound_ = false;
};

}  // namespace esw::service
