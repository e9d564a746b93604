#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace esw::ratings {

struct Session {
  std::string session_id;
  std::string listener_id;
  std::vector<std::string> stimulus_order;  // permutation of the test stimuli
  std::string r10_id;
  std::string r100_id;
  std::string narrow_id;                         // narrow rendering of the first stimulus presented
  std::map<std::string, std::string> narrow_for;  // test id -> narrow id
  std::string created_at;                         // UTC, ISO 8601

  bool operator==(const Session&) const = default;
};

struct Rating {
  std::string session_id;
  std::string listener_id;
  std::string stimulus_id;
  double score = 0.0;  // percent, [0, 120]
  std::string submitted_at;

  bool operator==(const Rating&) const = default;
};

inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 120.0;

std::string session_to_json(const Session& s);
Session session_from_json(const std::string& line);
std::string rating_to_json(const Rating& r);
Rating rating_from_json(const std::string& line);

// Current UTC time with millisecond precision, e.g. 2024-05-01T12:00:00.123Z.
std::string utc_timestamp();

// Append-only JSONL logs: ratings at `path`, sessions at `path` + ".sessions.jsonl".
// Every append is flushed and fsync'ed before returning, so an acknowledged
// write survives a crash. Existing logs are replayed on construction; a
// torn final line (no trailing newline) is ignored. Thread-safe.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path path);
  ~RatingStore();
  RatingStore(const RatingStore&) = delete;
  RatingStore& operator=(const RatingStore&) = delete;

  void add_session(const Session& s);
  void add_rating(const Rating& r);

  std::optional<Session> session(const std::string& id) const;
  std::vector<Session> sessions() const;
  // Every logged rating in submission order.
  std::vector<Rating> log() const;
  // One rating per (session, stimulus): the last submitted value, placed at
  // the position of the first submission.
  std::vector<Rating> results() const;

  const std::filesystem::path& path() const { return path_; }
  static std::filesystem::path sessions_path(const std::filesystem::path& ratings_path);

 private:
  void append(std::FILE* file, const std::string& line);

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::FILE* ratings_file_ = nullptr;
  std::FILE* sessions_file_ = nullptr;
  std::vector<Rating> log_;
  std::map<std::string, Session> sessions_;
};

std::vector<Rating> load_ratings(const std::filesystem::path& path);
std::vector<Rating> deduplicate(const std::vector<Rating>& log);

// Spearman rank correlation with average ranks for ties (Pearson correlation
// of the ranks). Throws when either input is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct ListenerCorrelation {
  std::string listener_id;
  std::size_t common = 0;
  std::optional<double> rho;  // empty when the ranks are constant
  std::vector<std::string> stimuli;
};

struct CorrelationReport {
  std::vector<ListenerCorrelation> listeners;
  std::vector<std::string> skipped;  // listeners with fewer than min_common stimuli
};

// Per listener: mean rating per stimulus across that listener's sessions
// (after deduplication), rank-correlated with the objective scores on the
// common stimuli. Throws if no listener shares min_common stimuli.
CorrelationReport correlate_scores(const std::vector<Rating>& ratings,
                                   const std::map<std::string, double>& scores,
                                   std::size_t min_common = 3);

std::string to_json(const CorrelationReport& report);

}  // namespace esw::ratings
