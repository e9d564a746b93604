#include "esw/ratings.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "esw/signal.hpp"

namespace esw::ratings {
namespace {

using nlohmann::json;

// Complete lines of a log file. A trailing fragment without newline is a
// torn write; it is cut off so later appends start on a fresh line.
std::vector<std::string> replay_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    if (nl > start) lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (start < text.size()) {
    in.close();
    std::filesystem::resize_file(path, start);
  }
  return lines;
}

std::FILE* open_append(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.c_str(), "ab");
  require(f != nullptr, "cannot open " + path.string() + " for appending");
  return f;
}

json parse_line(const std::string& line, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed ") + what + " log line: " + ex.what());
  }
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string session_to_json(const Session& s) {
  json doc = {{"session_id", s.session_id},
              {"listener_id", s.listener_id},
              {"stimulus_order", s.stimulus_order},
              {"references", {{"r10_id", s.r10_id}, {"r100_id", s.r100_id}, {"narrow_id", s.narrow_id}}},
              {"narrow_for", s.narrow_for},
              {"created_at", s.created_at}};
  return doc.dump();
}

Session session_from_json(const std::string& line) {
  const json doc = parse_line(line, "session");
  try {
    Session s;
    s.session_id = doc.at("session_id").get<std::string>();
    s.listener_id = doc.at("listener_id").get<std::string>();
    s.stimulus_order = doc.at("stimulus_order").get<std::vector<std::string>>();
    const auto& refs = doc.at("references");
    s.r10_id = refs.at("r10_id").get<std::string>();
    s.r100_id = refs.at("r100_id").get<std::string>();
    s.narrow_id = refs.at("narrow_id").get<std::string>();
    s.narrow_for = doc.value("narrow_for", std::map<std::string, std::string>{});
    s.created_at = doc.at("created_at").get<std::string>();
    return s;
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed session record: ") + ex.what());
  }
}

std::string rating_to_json(const Rating& r) {
  json doc = {{"session_id", r.session_id},
              {"listener_id", r.listener_id},
              {"stimulus_id", r.stimulus_id},
              {"score", r.score},
              {"submitted_at", r.submitted_at}};
  return doc.dump();
}

Rating rating_from_json(const std::string& line) {
  const json doc = parse_line(line, "rating");
  try {
    Rating r;
    r.session_id = doc.at("session_id").get<std::string>();
    r.listener_id = doc.value("listener_id", std::string());
    r.stimulus_id = doc.at("stimulus_id").get<std::string>();
    r.score = doc.at("score").get<double>();
    r.submitted_at = doc.at("submitted_at").get<std::string>();
    return r;
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed rating record: ") + ex.what());
  }
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::filesystem::path RatingStore::sessions_path(const std::filesystem::path& ratings_path) {
  return std::filesystem::path(ratings_path.string() + ".sessions.jsonl");
}

RatingStore::RatingStore(std::filesystem::path path) : path_(std::move(path)) {
  for (const auto& line : replay_lines(sessions_path(path_))) {
    Session s = session_from_json(line);
    sessions_[s.session_id] = std::move(s);
  }
  for (const auto& line : replay_lines(path_)) log_.push_back(rating_from_json(line));
  sessions_file_ = open_append(sessions_path(path_));
  ratings_file_ = open_append(path_);
}

RatingStore::~RatingStore() {
  if (ratings_file_) std::fclose(ratings_file_);
  if (sessions_file_) std::fclose(sessions_file_);
}

void RatingStore::append(std::FILE* file, const std::string& line) {
  const std::string record = line + "\n";
  require(std::fwrite(record.data(), 1, record.size(), file) == record.size(), "log write failed");
  require(std::fflush(file) == 0, "log flush failed");
  require(::fsync(::fileno(file)) == 0, "log fsync failed");
}

void RatingStore::add_session(const Session& s) {
  std::lock_guard lock(mutex_);
  require(!sessions_.count(s.session_id), "duplicate session id " + s.session_id);
  append(sessions_file_, session_to_json(s));
  sessions_[s.session_id] = s;
}

void RatingStore::add_rating(const Rating& r) {
  require(std::isfinite(r.score) && r.score >= kMinScore && r.score <= kMaxScore,
          "score outside [0, 120]");
  std::lock_guard lock(mutex_);
  append(ratings_file_, rating_to_json(r));
  log_.push_back(r);
}

std::optional<Session> RatingStore::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Session> RatingStore::sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<Session> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::vector<Rating> RatingStore::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::vector<Rating> RatingStore::results() const { return deduplicate(log()); }

std::vector<Rating> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open ratings log " + path.string());
  std::vector<Rating> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(rating_from_json(line));
  }
  return out;
}

std::vector<Rating> deduplicate(const std::vector<Rating>& log) {
  std::vector<Rating> out;
  std::map<std::pair<std::string, std::string>, std::size_t> position;
  for (const auto& r : log) {
    auto [it, inserted] = position.emplace(std::make_pair(r.session_id, r.stimulus_id), out.size());
    if (inserted) {
      out.push_back(r);
    } else {
      out[it->second] = r;
    }
  }
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "rank correlation needs equally long inputs");
  require(a.size() >= 2, "rank correlation needs at least two items");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  require(saa > 0.0 && sbb > 0.0, "rank correlation is undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

CorrelationReport correlate_scores(const std::vector<Rating>& ratings,
                                   const std::map<std::string, double>& scores,
                                   std::size_t min_common) {
  require(min_common >= 2, "at least two common stimuli are needed");
  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
  for (const auto& r : deduplicate(ratings)) {
    auto& cell = sums[r.listener_id][r.stimulus_id];
    cell.first += r.score;
    cell.second += 1;
  }

  CorrelationReport report;
  for (const auto& [listener, per_stimulus] : sums) {
    ListenerCorrelation lc;
    lc.listener_id = listener;
    std::vector<double> mean_rating, objective;
    for (const auto& [stimulus, cell] : per_stimulus) {
      auto it = scores.find(stimulus);
      if (it == scores.end()) continue;
      lc.stimuli.push_back(stimulus);
      mean_rating.push_back(cell.first / cell.second);
      objective.push_back(it->second);
    }
    lc.common = lc.stimuli.size();
    if (lc.common < min_common) {
      report.skipped.push_back(listener);
      continue;
    }
    try {
      lc.rho = spearman(mean_rating, objective);
    } catch (const Error&) {
      lc.rho.reset();
    }
    report.listeners.push_back(std::move(lc));
  }
  require(!report.listeners.empty(), "insufficient overlap: no listener rated " + std::to_string(min_common) +
                                         " or more scored stimuli");
  return report;
}

std::string to_json(const CorrelationReport& report) {
  json doc;
  doc["listeners"] = json::array();
  for (const auto& lc : report.listeners) {
    doc["listeners"].push_back({{"listener_id", lc.listener_id},
                                {"common", lc.common},
                                {"spearman", lc.rho ? json(*lc.rho) : json(nullptr)},
                                {"stimuli", lc.stimuli}});
  }
  doc["skipped"] = report.skipped;
  return doc.dump(2);
}

}  // namespace esw::ratings
