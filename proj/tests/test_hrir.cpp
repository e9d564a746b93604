#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "esw/hrir.hpp"
#include "esw/posc.hpp"
#include "oracles.hpp"

using namespace esw;
using namespace esw::hrir;

namespace {

const HrirBank& default_bank() {
  static const HrirBank bank = synth_spherical_bank();
  return bank;
}

double centroid(const CorrelationFunction& c, int half) {
  double num = 0.0, den = 0.0;
  for (int k = -half; k <= half; ++k) {
    num += k * std::abs(c.at(k));
    den += std::abs(c.at(k));
  }
  return num / den;
}

std::string expect_error(const std::string& json_text) {
  try {
    parse_bank(json_text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(WoodworthTest, MatchesClosedForm) {
  SphericalHeadParams p;
  for (double az : {0.0, 15.0, 45.0, 60.0, 90.0}) {
    EXPECT_EQ(itd_samples(az, p), oracle::woodworth_samples(az));
    EXPECT_EQ(itd_samples(-az, p), itd_samples(az, p));
  }
  EXPECT_NEAR(woodworth_itd_seconds(90.0, 0.0875, 343.0) * 1e3, 0.6558, 1e-4);
  // 0.6558 ms * 48 kHz = 31.48 samples, which rounds to 31.
  EXPECT_EQ(itd_samples(90.0, p), 31);
  EXPECT_EQ(interaural_lag(45.0, p), -18);
  EXPECT_EQ(interaural_lag(-45.0, p), 18);
}

TEST(SyntheticBankTest, FrontIsSymmetric) {
  const auto& e = default_bank().at(0.0);
  EXPECT_EQ(e.left, e.right);
  EXPECT_EQ(interaural_lag(0.0, {}), 0);
}

TEST(SyntheticBankTest, GridCoversFrontalPlane) {
  const auto az = default_bank().azimuths();
  ASSERT_EQ(az.size(), 37u);
  EXPECT_DOUBLE_EQ(az.front(), -90.0);
  EXPECT_DOUBLE_EQ(az.back(), 90.0);
  EXPECT_EQ(frontal_grid(30.0), (std::vector<double>{-90, -60, -30, 0, 30, 60, 90}));
}

TEST(SyntheticBankTest, MirrorSymmetry) {
  for (double az : default_bank().azimuths()) {
    const auto& a = default_bank().at(az);
    const auto& b = default_bank().at(-az);
    EXPECT_EQ(a.left, b.right) << az;
    EXPECT_EQ(a.right, b.left) << az;
  }
}

TEST(SyntheticBankTest, FarEarIsShadowed) {
  const auto& e = default_bank().at(60.0);
  double le = 0.0, re = 0.0;
  for (double v : e.left) le += v * v;
  for (double v : e.right) re += v * v;
  EXPECT_LT(le, re);  // source on the right: left ear is the far ear
}

TEST(SyntheticBankTest, Deterministic) { EXPECT_EQ(synth_spherical_bank(), synth_spherical_bank()); }

TEST(SyntheticBankTest, ParameterErrors) {
  SphericalHeadParams p;
  p.ir_length = 40;
  EXPECT_THROW(synth_spherical_bank(p), Error);
  p = {};
  p.grid_step_deg = 45.0;
  EXPECT_THROW(synth_spherical_bank(p), Error);
  p.grid_step_deg = 0.0;
  EXPECT_THROW(synth_spherical_bank(p), Error);
  p = {};
  p.head_radius_m = -1.0;
  EXPECT_THROW(synth_spherical_bank(p), Error);
}

TEST(HrirBankTest, NoInterpolation) {
  EXPECT_THROW(default_bank().at(7.5), Error);
  EXPECT_FALSE(default_bank().index_of(7.5).has_value());
  EXPECT_TRUE(default_bank().index_of(-35.0).has_value());
}

TEST(BankFileTest, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "esw_bank_test.json";
  save_bank(default_bank(), path);
  EXPECT_EQ(load_bank(path), default_bank());
  std::filesystem::remove(path);
}

TEST(BankFileTest, DistinctErrors) {
  const std::string dup =
      R"({"sample_rate":48000,"ir_length":2,"entries":[{"azimuth_deg":0,"left":[1,0],"right":[1,0]},)"
      R"({"azimuth_deg":0,"left":[1,0],"right":[1,0]}]})";
  EXPECT_NE(expect_error(dup).find("duplicate azimuth"), std::string::npos);

  const std::string order =
      R"({"sample_rate":48000,"ir_length":2,"entries":[{"azimuth_deg":5,"left":[1,0],"right":[1,0]},)"
      R"({"azimuth_deg":0,"left":[1,0],"right":[1,0]}]})";
  EXPECT_NE(expect_error(order).find("not strictly increasing"), std::string::npos);

  const std::string mismatch =
      R"({"sample_rate":48000,"ir_length":2,"entries":[{"azimuth_deg":0,"left":[1,0],"right":[1]}]})";
  EXPECT_NE(expect_error(mismatch).find("length mismatch"), std::string::npos);

  EXPECT_NE(expect_error("{not json").find("malformed HRIR manifest"), std::string::npos);
  EXPECT_NE(expect_error(R"({"entries":[]})").find("malformed HRIR manifest"), std::string::npos);
}

TEST(MagnitudeBasisTest, ArgmaxIsRoundedItdEverywhere) {
  const auto basis = magnitude_basis(default_bank(), 48);
  for (const auto& e : basis.entries) {
    const long expected = (e.azimuth_deg > 0 ? -1 : 1) * oracle::woodworth_samples(e.azimuth_deg);
    EXPECT_EQ(e.basis.argmax(), expected) << e.azimuth_deg;
  }
}

TEST(MagnitudeBasisTest, FrontPeaksAtZeroAndCentroidAt45) {
  const auto basis = magnitude_basis(default_bank(), 48);
  EXPECT_EQ(basis.entries[18].basis.argmax(), 0);
  const auto& b45 = basis.entries[27];
  ASSERT_DOUBLE_EQ(b45.azimuth_deg, 45.0);
  EXPECT_NEAR(centroid(b45.basis, 48), -oracle::woodworth_samples(45.0), 1e-9);
}

TEST(MagnitudeBasisTest, CompactInFrontWiderAtSide) {
  const auto basis = magnitude_basis(default_bank(), 48);
  EXPECT_LT(posc::dispersion(basis.entries[18].basis), posc::dispersion(basis.entries[0].basis));
}

TEST(MagnitudeBasisTest, MirrorProperty) {
  const auto basis = magnitude_basis(default_bank(), 48);
  const std::size_t n = basis.entries.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = basis.entries[i].basis;
    const auto& b = basis.entries[n - 1 - i].basis;
    for (int k = -48; k <= 48; ++k) EXPECT_NEAR(a.at(k), b.at(-k), 1e-12);
  }
}

TEST(MagnitudeBasisTest, MaxLagMustFitImpulseResponse) {
  EXPECT_THROW(magnitude_basis(default_bank(), 256), Error);
}

TEST(PhaseBasisTest, FrontIsDelta) {
  const auto basis = phase_basis(default_bank());
  const auto& b0 = basis.entries[18].basis;
  EXPECT_EQ(b0.argmax(), 0);
  EXPECT_NEAR(b0.at(0), 1.0, 1e-9);
}

TEST(PhaseBasisTest, UnitEnergy) {
  for (const auto& e : phase_basis(default_bank()).entries) {
    EXPECT_NEAR(e.basis.sum_of_squares(), 1.0, 1e-6) << e.azimuth_deg;
  }
}

TEST(PhaseBasisTest, CentroidMonotoneInAzimuth) {
  const auto basis = phase_basis(default_bank());
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& e : basis.entries) {
    const double c = centroid(e.basis, 48);
    EXPECT_LT(c, previous) << e.azimuth_deg;
    previous = c;
  }
}

TEST(PhaseBasisTest, MirrorProperty) {
  const auto basis = phase_basis(default_bank());
  const std::size_t n = basis.entries.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = basis.entries[i].basis;
    const auto& b = basis.entries[n - 1 - i].basis;
    for (int k = -100; k <= 100; ++k) EXPECT_NEAR(a.at(k), b.at(-k), 1e-12);
  }
}

TEST(PhaseBasisTest, DeterministicAndThreadIndependent) {
  const auto a = phase_basis(default_bank(), {}, Exec::kSerial);
  const auto b = phase_basis(default_bank(), {}, Exec::kParallel);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].basis, b.entries[i].basis);
}

TEST(PhaseBasisTest, FloorMustBePositive) {
  EXPECT_THROW(phase_basis(default_bank(), GccPhatOptions{0.0}), Error);
}
