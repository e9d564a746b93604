#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "esw/signal.hpp"

namespace esw::wav {

enum class SampleFormat { kPcm16, kFloat32 };

struct Audio {
  int sample_rate = 0;
  std::vector<Signal> channels;  // channel 0 is left for stereo files
};

// RIFF/WAVE reader for 16-bit PCM and 32-bit IEEE float, any channel count.
// WAVE_FORMAT_EXTENSIBLE headers carrying either subformat are accepted.
Audio read(const std::filesystem::path& path);
Audio decode(const std::string& bytes);

// Writes channels of equal length and rate. PCM16 samples are clipped to [-1, 1].
void write(const std::filesystem::path& path, const std::vector<Signal>& channels,
           SampleFormat format = SampleFormat::kPcm16);
std::string encode(const std::vector<Signal>& channels, SampleFormat format);

}  // namespace esw::wav
