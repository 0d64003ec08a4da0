#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "sefusion/corpus.hpp"

namespace sefusion::corpus {

namespace {

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
bool tag_is(const std::vector<std::uint8_t>& b, std::size_t at, const char* tag) {
  return b[at] == tag[0] && b[at + 1] == tag[1] && b[at + 2] == tag[2] && b[at + 3] == tag[3];
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Waveform decode_wav(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw WavError(name + ": not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) throw WavError(name + ": malformed fmt chunk");
      std::uint16_t format = le16(bytes, body);
      const std::uint16_t channels = le16(bytes, body + 2);
      rate = le32(bytes, body + 4);
      const std::uint16_t bits = le16(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) format = le16(bytes, body + 24);
      if (format != kFormatPcm) {
        throw UnsupportedWavError(name + ": unsupported encoding (format tag " +
                                  std::to_string(format) + "), only PCM is accepted");
      }
      if (channels != 1) {
        throw UnsupportedWavError(name + ": " + std::to_string(channels) +
                                  " channels, only mono is accepted");
      }
      if (bits != 16) {
        throw UnsupportedWavError(name + ": " + std::to_string(bits) +
                                  "-bit samples, only 16-bit is accepted");
      }
      if (rate == 0) throw WavError(name + ": zero sample rate");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw WavError(name + ": data chunk precedes fmt chunk");
      const std::size_t available = bytes.size() - body;
      if (size > available) {
        throw WavError(name + ": truncated data chunk, header declares " + std::to_string(size) +
                       " bytes but only " + std::to_string(available) + " are present");
      }
      if (size % 2 != 0) throw WavError(name + ": odd data chunk size for 16-bit samples");
      Waveform w;
      w.sample_rate_hz = rate;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(le16(bytes, body + 2 * i));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1u);
  }
  throw WavError(name + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

std::vector<std::uint8_t> encode_wav(const Waveform& w, WriteReport* report) {
  const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate_hz));
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_bytes);
  put_tag(b, "RIFF");
  put32(b, 36 + data_bytes);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put32(b, 16);
  put16(b, kFormatPcm);
  put16(b, 1);
  put32(b, rate);
  put32(b, rate * 2);
  put16(b, 2);
  put16(b, 16);
  put_tag(b, "data");
  put32(b, data_bytes);
  std::size_t clipped = 0;
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw DomainError("encode_wav: non-finite sample");
    double v = std::nearbyint(s * 32768.0);
    if (v > 32767.0 || v < -32768.0) {
      ++clipped;
      v = std::clamp(v, -32768.0, 32767.0);
    }
    put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (report) report->clipped = clipped;
  return b;
}

WriteReport write_wav(const std::filesystem::path& path, const Waveform& w) {
  WriteReport report;
  const auto bytes = encode_wav(w, &report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
  return report;
}

}  // namespace sefusion::corpus
