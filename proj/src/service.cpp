#include "esw/service.hpp"

#include <httplib.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "esw/wav.hpp"

namespace esw::service {
namespace {

using nlohmann::json;

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read stimulus " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Session ids must not repeat across restarts, so they come from the OS
// entropy source rather than the seeded permutation generator.
std::string fresh_session_id() {
  std::random_device rd;
  char out[33];
  for (int i = 0; i < 4; ++i) std::snprintf(out + 8 * i, 9, "%08x", static_cast<unsigned>(rd()));
  return std::string(out, 32);
}

json session_json(const ratings::Session& s) {
  return json::parse(ratings::session_to_json(s));
}

bool session_may_fetch(const ratings::Session& s, const std::string& id) {
  if (id == s.r10_id || id == s.r100_id || id == s.narrow_id) return true;
  for (const auto& t : s.stimulus_order) {
    if (t == id) return true;
  }
  for (const auto& [test, narrow] : s.narrow_for) {
    if (narrow == id) return true;
  }
  return false;
}

}  // namespace

ExperimentService::ExperimentService(ServiceOptions options)
    : options_(std::move(options)),
      manifest_(experiment::load_manifest(options_.stimulus_dir)),
      store_(options_.results_path),
      rng_(options_.seed),
      server_(std::make_unique<httplib::Server>()) {
  for (const auto& e : manifest_.entries) {
    std::string bytes = read_bytes(options_.stimulus_dir / e.file);
    const auto audio = wav::decode(bytes);
    require(audio.channels.size() == 2, "stimulus " + e.id + " is not a stereo WAV");
    audio_[e.id] = std::move(bytes);
  }
  for (const std::string& id : {manifest_.r10_id, manifest_.r100_id}) {
    require(audio_.count(id), "stimulus manifest lacks reference " + id);
  }
  for (const auto& id : manifest_.test_ids()) {
    auto it = manifest_.narrow_for.find(id);
    require(it != manifest_.narrow_for.end() && audio_.count(it->second),
            "stimulus manifest lacks a narrow rendering for " + id);
  }
  install_routes();
}

ExperimentService::~ExperimentService() { stop(); }

ratings::Session ExperimentService::create_session(const std::string& listener_id) {
  ratings::Session s;
  s.session_id = fresh_session_id();
  s.listener_id = listener_id;
  s.stimulus_order = manifest_.test_ids();
  {
    std::lock_guard lock(rng_mutex_);
    for (std::size_t i = s.stimulus_order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(s.stimulus_order[i - 1], s.stimulus_order[j]);
    }
  }
  s.r10_id = manifest_.r10_id;
  s.r100_id = manifest_.r100_id;
  for (const auto& id : s.stimulus_order) s.narrow_for[id] = manifest_.narrow_for.at(id);
  s.narrow_id = s.narrow_for.at(s.stimulus_order.front());
  s.created_at = ratings::utc_timestamp();
  store_.add_session(s);
  return s;
}

void ExperimentService::install_routes() {
  auto& srv = *server_;

  srv.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
    std::string listener;
    try {
      const json body = json::parse(req.body);
      if (!body.is_object() || !body.contains("listener_id") || !body["listener_id"].is_string()) {
        return send_error(res, 400, "body must be {\"listener_id\": string}");
      }
      listener = body["listener_id"].get<std::string>();
    } catch (const json::exception&) {
      return send_error(res, 400, "body is not valid JSON");
    }
    if (listener.empty()) return send_error(res, 400, "listener_id must not be empty");
    const auto s = create_session(listener);
    res.status = 201;
    res.set_content(session_json(s).dump(), "application/json");
  });

  srv.Get("/api/stimulus/:session_id/:stimulus_id", [this](const httplib::Request& req, httplib::Response& res) {
    const auto s = store_.session(req.path_params.at("session_id"));
    if (!s) return send_error(res, 404, "unknown session");
    const std::string& id = req.path_params.at("stimulus_id");
    auto it = audio_.find(id);
    if (it == audio_.end() || !session_may_fetch(*s, id)) return send_error(res, 404, "unknown stimulus");
    res.status = 200;
    res.set_content(it->second, "audio/wav");
  });

  srv.Post("/api/rating", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      return send_error(res, 400, "body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("session_id") || !body["session_id"].is_string() ||
        !body.contains("stimulus_id") || !body["stimulus_id"].is_string() || !body.contains("score") ||
        !body["score"].is_number()) {
      return send_error(res, 400, "body must be {\"session_id\": string, \"stimulus_id\": string, \"score\": number}");
    }
    const auto s = store_.session(body["session_id"].get<std::string>());
    if (!s) return send_error(res, 404, "unknown session");
    const std::string stimulus = body["stimulus_id"].get<std::string>();
    if (std::find(s->stimulus_order.begin(), s->stimulus_order.end(), stimulus) == s->stimulus_order.end()) {
      return send_error(res, 404, "unknown stimulus");
    }
    const double score = body["score"].get<double>();
    if (!std::isfinite(score) || score < ratings::kMinScore || score > ratings::kMaxScore) {
      return send_error(res, 422, "score outside [0, 120]");
    }
    store_.add_rating({s->session_id, s->listener_id, stimulus, score, ratings::utc_timestamp()});
    res.status = 204;
  });

  srv.Get("/api/results", [this](const httplib::Request&, httplib::Response& res) {
    json out = {{"ratings", json::array()}};
    for (const auto& r : store_.results()) out["ratings"].push_back(json::parse(ratings::rating_to_json(r)));
    res.status = 200;
    res.set_content(out.dump(), "application/json");
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& ex) {
      message = ex.what();
    } catch (...) {
    }
    send_error(res, 500, message);
  });

  if (options_.ui_dir) {
    require(srv.set_mount_point("/", options_.ui_dir->string()),
            "UI directory " + options_.ui_dir->string() + " does not exist");
  }
}

int ExperimentService::bind(const std::string& host, int port) {
  require(!bound_, "service already bound");
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  require(bound > 0, "cannot bind " + host + ":" + std::to_string(port));
  bound_ = true;
  return bound;
}

void ExperimentService::run() {
  require(bound_, "service not bound");
  server_->listen_after_bind();
}

void ExperimentService::start() {
  require(bound_, "service not bound");
  require(!thread_.joinable(), "service already running");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void ExperimentService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace esw::service
