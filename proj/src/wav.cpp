#include "esw/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace esw::wav {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::string& bytes, std::size_t pos) {
  require(pos + sizeof(T) <= bytes.size(), "truncated WAV data");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

Audio decode(const std::string& bytes) {
  require(bytes.size() >= 12 && bytes.compare(0, 4, "RIFF") == 0 && bytes.compare(8, 4, "WAVE") == 0,
          "not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_len = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const auto len = read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      require(len >= 16, "WAV fmt chunk too short");
      format = read_le<std::uint16_t>(bytes, body);
      channels = read_le<std::uint16_t>(bytes, body + 2);
      rate = read_le<std::uint32_t>(bytes, body + 4);
      bits = read_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible) {
        require(len >= 40, "WAV extensible fmt chunk too short");
        format = read_le<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = std::min<std::size_t>(len, bytes.size() - body);
      have_data = true;
    }
    pos = body + len + (len & 1u);
  }
  require(have_fmt, "WAV file has no fmt chunk");
  require(have_data, "WAV file has no data chunk");
  require(channels >= 1, "WAV file declares zero channels");
  require(rate > 0, "WAV file declares zero sample rate");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  require(pcm16 || f32, "unsupported WAV sample format (need 16-bit PCM or 32-bit float)");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  require(frames >= 1, "WAV file holds no samples");
  std::vector<std::vector<double>> data(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_pos + (i * channels + c) * width;
      data[c][i] = pcm16 ? std::max(-1.0, read_le<std::int16_t>(bytes, at) / 32767.0)
                         : static_cast<double>(read_le<float>(bytes, at));
    }
  }
  Audio audio;
  audio.sample_rate = static_cast<int>(rate);
  for (auto& ch : data) audio.channels.emplace_back(std::move(ch), audio.sample_rate);
  return audio;
}

Audio read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open WAV file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode(ss.str());
}

std::string encode(const std::vector<Signal>& channels, SampleFormat format) {
  require(!channels.empty(), "no channels to write");
  const int rate = channels.front().sample_rate();
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    require(ch.sample_rate() == rate && ch.size() == frames, "WAV channels differ in length or rate");
  }
  const bool pcm = format == SampleFormat::kPcm16;
  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(nch * bits / 8);
  const auto data_len = static_cast<std::uint32_t>(frames * block);
  const std::uint32_t fmt_len = pcm ? 16 : 18;
  const std::uint32_t fact_len = pcm ? 0 : 12;

  std::string out;
  out.reserve(44 + data_len + 14);
  out += "RIFF";
  put_le<std::uint32_t>(out, 4 + (8 + fmt_len) + fact_len + (8 + data_len));
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, fmt_len);
  put_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  put_le<std::uint16_t>(out, nch);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate) * block);
  put_le<std::uint16_t>(out, block);
  put_le<std::uint16_t>(out, bits);
  if (!pcm) {
    put_le<std::uint16_t>(out, 0);
    out += "fact";
    put_le<std::uint32_t>(out, 4);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  }
  out += "data";
  put_le<std::uint32_t>(out, data_len);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      if (pcm) {
        const double v = std::clamp(ch[i], -1.0, 1.0) * 32767.0;
        put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(v)));
      } else {
        put_le<float>(out, static_cast<float>(ch[i]));
      }
    }
  }
  if (data_len & 1u) out.push_back('\0');
  return out;
}

void write(const std::filesystem::path& path, const std::vector<Signal>& channels,
           SampleFormat format) {
  const std::string bytes = encode(channels, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot write WAV file: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), "failed writing WAV file: " + path.string());
}

}  // namespace esw::wav
