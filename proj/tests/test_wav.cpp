#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "esw/random.hpp"
#include "esw/wav.hpp"

using namespace esw;

TEST(WavTest, Float32RoundTripIsExactToFloatPrecision) {
  const Signal l = white_noise(1000, 0.3, 1, 44100);
  const Signal r = white_noise(1000, 0.3, 2, 44100);
  const auto audio = wav::decode(wav::encode({l, r}, wav::SampleFormat::kFloat32));
  EXPECT_EQ(audio.sample_rate, 44100);
  ASSERT_EQ(audio.channels.size(), 2u);
  for (std::size_t i = 0; i < l.size(); ++i) {
    EXPECT_EQ(audio.channels[0][i], static_cast<double>(static_cast<float>(l[i])));
    EXPECT_EQ(audio.channels[1][i], static_cast<double>(static_cast<float>(r[i])));
  }
}

TEST(WavTest, Pcm16RoundTripWithinQuantization) {
  const Signal m = white_noise(500, 0.2, 3);
  const auto audio = wav::decode(wav::encode({m}, wav::SampleFormat::kPcm16));
  ASSERT_EQ(audio.channels.size(), 1u);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(audio.channels[0][i], m[i], 0.5 / 32767.0 + 1e-12);
}

TEST(WavTest, Pcm16ClipsOutOfRange) {
  const auto audio = wav::decode(wav::encode({Signal({2.0, -2.0}, 8000)}, wav::SampleFormat::kPcm16));
  EXPECT_DOUBLE_EQ(audio.channels[0][0], 1.0);
  EXPECT_LE(audio.channels[0][1], -1.0 + 1e-9);
}

TEST(WavTest, EncodingIsDeterministic) {
  const Signal m = white_noise(300, 0.2, 3);
  EXPECT_EQ(wav::encode({m, m}, wav::SampleFormat::kPcm16), wav::encode({m, m}, wav::SampleFormat::kPcm16));
}

TEST(WavTest, RejectsGarbage) {
  EXPECT_THROW(wav::decode("not a wav file at all"), Error);
  std::string bytes = wav::encode({Signal({0.1, 0.2}, 8000)}, wav::SampleFormat::kPcm16);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(wav::decode(bytes.substr(0, 20)), Error);
}

TEST(WavTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "esw_wav_test.wav";
  const Signal m = white_noise(256, 0.2, 9);
  wav::write(path, {m}, wav::SampleFormat::kFloat32);
  const auto audio = wav::read(path);
  EXPECT_EQ(audio.channels[0].size(), 256u);
  std::filesystem::remove(path);
  EXPECT_THROW(wav::read(path), Error);
}
