#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sefusion/dsp.hpp"

namespace sefusion::corpus {

struct WavError : IoError {
  using IoError::IoError;
};
struct UnsupportedWavError : WavError {
  using WavError::WavError;
};

/// Reads RIFF/WAVE PCM16 mono. Samples are scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(const std::vector<std::uint8_t>& bytes, const std::string& name = "<memory>");

struct WriteReport {
  std::size_t clipped = 0;
};
/// Writes PCM16 mono with round-to-nearest; out-of-range samples are clipped
/// and counted.
WriteReport write_wav(const std::filesystem::path& path, const Waveform& w);
std::vector<std::uint8_t> encode_wav(const Waveform& w, WriteReport* report = nullptr);

/// Windowed-sinc polyphase resampling between integer rates.
Waveform resample_to(const Waveform& w, double target_hz);

struct SpeechLevel {
  double asl_db = 0.0;           // active level, dB relative to a full-scale power of 1
  double activity_factor = 0.0;  // active fraction of samples
  double threshold = 0.0;        // envelope threshold at which activity is counted
};

/// Active speech level, ITU-T P.56 method B.
SpeechLevel active_speech_level(const Waveform& w);

/// Per-sample activity at `threshold` with the same envelope and hangover
/// as `active_speech_level`.
std::vector<bool> activity_mask(const Waveform& w, double threshold);

struct FixedOffset {
  std::size_t samples = 0;
};
struct SeededRandomOffset {
  std::uint64_t seed = 0;
};

struct MixSpec {
  std::filesystem::path clean_path;
  std::filesystem::path noise_path;
  double snr_db = 0.0;
  std::variant<FixedOffset, SeededRandomOffset> offset = SeededRandomOffset{0};
  double lead_noise_ms = 300.0;
  double target_rate_hz = 16000.0;
};

struct MixResult {
  Waveform noisy;
  Waveform clean_aligned;
  Waveform noise_scaled;
  double noise_gain = 1.0;
  std::size_t noise_offset = 0;
  std::size_t lead_samples = 0;
};

/// Mixes `clean` with a segment of `noise` at `snr_db` relative to the clean
/// active speech level, measured against the noise power over the
/// speech-active samples. `lead_noise_ms` of noise-only signal precedes the
/// speech.
MixResult mix_signals(const Waveform& clean, const Waveform& noise, double snr_db,
                      const std::variant<FixedOffset, SeededRandomOffset>& offset,
                      double lead_noise_ms);
MixResult mix_at_snr(const MixSpec& spec);

}  // namespace sefusion::corpus
