#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <set>
#include <thread>

#include "esw/ratings.hpp"
#include "esw/service.hpp"
#include "esw/wav.hpp"
#include "fixtures.hpp"

using namespace esw;
using nlohmann::json;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { stimuli_ = new std::filesystem::path(fixtures::write_small_stimuli("svc")); }
  static void TearDownTestSuite() {
    std::filesystem::remove_all(*stimuli_);
    delete stimuli_;
  }

  void SetUp() override {
    results_dir_ = fixtures::temp_dir("svc_results");
    start();
  }
  void TearDown() override {
    stop();
    std::filesystem::remove_all(results_dir_);
  }

  void start(std::uint64_t seed = 7) {
    service_ = std::make_unique<service::ExperimentService>(
        service::ServiceOptions{*stimuli_, results_dir_ / "ratings.jsonl", seed, std::nullopt});
    port_ = service_->bind("127.0.0.1", 0);
    service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void stop() {
    client_.reset();
    service_.reset();
  }

  json create_session(const std::string& listener) {
    auto res = client_->Post("/api/session", json{{"listener_id", listener}}.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body);
  }

  int post_rating(const json& body) {
    auto res = client_->Post("/api/rating", body.dump(), "application/json");
    return res ? res->status : -1;
  }

  static std::filesystem::path* stimuli_;
  std::filesystem::path results_dir_;
  std::unique_ptr<service::ExperimentService> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

std::filesystem::path* ServiceTest::stimuli_ = nullptr;

}  // namespace

TEST_F(ServiceTest, SessionDescriptor) {
  const auto s = create_session("alice");
  const auto order = s.at("stimulus_order").get<std::vector<std::string>>();
  EXPECT_EQ(std::set<std::string>(order.begin(), order.end()),
            (std::set<std::string>{"noise_w10", "noise_w30", "harmonic_w30", "clicks_w20"}));
  EXPECT_EQ(s.at("references").at("r10_id"), "r10");
  EXPECT_EQ(s.at("references").at("r100_id"), "r100");
  EXPECT_FALSE(s.at("references").at("narrow_id").get<std::string>().empty());
  EXPECT_FALSE(s.at("session_id").get<std::string>().empty());
  EXPECT_FALSE(s.at("created_at").get<std::string>().empty());
}

TEST_F(ServiceTest, RoundTrip) {
  const auto s = create_session("alice");
  const std::string sid = s.at("session_id");
  const auto order = s.at("stimulus_order").get<std::vector<std::string>>();
  double score = 10.0;
  for (const auto& id : order) {
    auto res = client_->Get("/api/stimulus/" + sid + "/" + id);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "audio/wav");
    EXPECT_EQ(wav::decode(res->body).channels.size(), 2u);
    EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", score}}), 204);
    score += 25.0;
  }
  for (const std::string ref : {"r10", "r100"}) {
    EXPECT_EQ(client_->Get("/api/stimulus/" + sid + "/" + ref)->status, 200);
  }
  auto res = client_->Get("/api/results");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto ratings = json::parse(res->body).at("ratings");
  ASSERT_EQ(ratings.size(), order.size());
  for (const auto& r : ratings) {
    EXPECT_EQ(r.at("session_id"), sid);
    EXPECT_EQ(r.at("listener_id"), "alice");
    EXPECT_FALSE(r.at("submitted_at").get<std::string>().empty());
  }
}

TEST_F(ServiceTest, ResubmissionKeepsLastValue) {
  const auto s = create_session("alice");
  const std::string sid = s.at("session_id");
  const std::string id = s.at("stimulus_order")[0];
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 40}}), 204);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 55}}), 204);
  const auto ratings = json::parse(client_->Get("/api/results")->body).at("ratings");
  ASSERT_EQ(ratings.size(), 1u);
  EXPECT_EQ(ratings[0].at("score"), 55.0);
}

TEST_F(ServiceTest, ErrorStatuses) {
  const auto s = create_session("bob");
  const std::string sid = s.at("session_id");
  const std::string id = s.at("stimulus_order")[0];
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 125}}), 422);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", -0.5}}), 422);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 120}}), 204);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 0}}), 204);
  EXPECT_EQ(post_rating({{"session_id", "nope"}, {"stimulus_id", id}, {"score", 50}}), 404);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", "nope"}, {"score", 50}}), 404);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", "r10"}, {"score", 50}}), 404);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", "high"}}), 400);
  EXPECT_EQ(post_rating({{"session_id", sid}}), 400);
  EXPECT_EQ(client_->Post("/api/rating", "{broken", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/api/session", "[]", "application/json")->status, 400);
  EXPECT_EQ(client_->Get("/api/stimulus/nope/" + id)->status, 404);
  EXPECT_EQ(client_->Get("/api/stimulus/" + sid + "/nope")->status, 404);
}

TEST_F(ServiceTest, PermutationsAreSeededPerService) {
  std::vector<std::vector<std::string>> first;
  for (int i = 0; i < 6; ++i) first.push_back(create_session("carol").at("stimulus_order"));
  std::set<std::vector<std::string>> distinct(first.begin(), first.end());
  EXPECT_GT(distinct.size(), 1u);  // sessions get their own permutations

  stop();
  std::filesystem::remove_all(results_dir_);
  std::filesystem::create_directories(results_dir_);
  start();
  for (int i = 0; i < 6; ++i) EXPECT_EQ(create_session("carol").at("stimulus_order"), first[i]);
}

TEST_F(ServiceTest, RatingsSurviveRestart) {
  const auto s = create_session("dave");
  const std::string sid = s.at("session_id");
  const std::string id = s.at("stimulus_order")[1];
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 77.5}}), 204);
  stop();
  start();
  const auto ratings = json::parse(client_->Get("/api/results")->body).at("ratings");
  ASSERT_EQ(ratings.size(), 1u);
  EXPECT_EQ(ratings[0].at("score"), 77.5);
  // The session itself survives too.
  EXPECT_EQ(client_->Get("/api/stimulus/" + sid + "/" + id)->status, 200);
  EXPECT_EQ(post_rating({{"session_id", sid}, {"stimulus_id", id}, {"score", 80}}), 204);
}

TEST_F(ServiceTest, ConcurrentSessions) {
  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port_);
      auto res = c.Post("/api/session", json{{"listener_id", "w" + std::to_string(t)}}.dump(), "application/json");
      if (!res || res->status != 201) return;
      const auto s = json::parse(res->body);
      for (const auto& id : s.at("stimulus_order")) {
        auto r = c.Post("/api/rating",
                        json{{"session_id", s.at("session_id")}, {"stimulus_id", id}, {"score", 60}}.dump(),
                        "application/json");
        if (r && r->status == 204) ++ok;
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(ok.load(), 16);
  EXPECT_EQ(json::parse(client_->Get("/api/results")->body).at("ratings").size(), 16u);
  EXPECT_EQ(ratings::load_ratings(results_dir_ / "ratings.jsonl").size(), 16u);
}
