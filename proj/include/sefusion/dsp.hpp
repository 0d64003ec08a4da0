#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sefusion/common.hpp"

namespace sefusion {

/// Mono time-domain signal.
struct Waveform {
  std::vector<double> samples;
  double sample_rate_hz = 16000.0;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Throws DomainError unless the waveform is non-empty, finite, and has a
/// positive rate.
void validate(const Waveform& w);

enum class WindowKind { hamming, hann, rectangular };

const char* to_string(WindowKind k);
WindowKind window_kind_from_string(const std::string& s);

struct AnalysisConfig {
  std::size_t window_len = 512;
  std::size_t hop = 256;
  std::size_t fft_size = 512;
  WindowKind window = WindowKind::hamming;

  std::size_t num_bins() const { return fft_size / 2 + 1; }

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

/// 32 ms / 16 ms / 512 at 16 kHz.
AnalysisConfig acoustic_default();
/// 16 acoustic frames (256 ms) / 2 frames (32 ms) / 64.
AnalysisConfig modulation_default();

void validate(const AnalysisConfig& cfg);

/// Periodic window of `cfg.window_len` samples.
std::vector<double> make_window(WindowKind kind, std::size_t len);

/// Frame count after tail zero-padding: the smallest count whose frames
/// cover every source sample. Throws FramingError if the source is shorter
/// than one window.
std::size_t frame_count(std::size_t source_len, const AnalysisConfig& cfg);
std::size_t padded_length(std::size_t source_len, const AnalysisConfig& cfg);

struct Spectrogram {
  Matrix<std::complex<double>> coeffs;  // [frames x bins]
  AnalysisConfig config;
  std::size_t source_len = 0;
  double sample_rate_hz = 16000.0;

  std::size_t num_frames() const { return coeffs.rows(); }
  std::size_t num_bins() const { return coeffs.cols(); }
};

Spectrogram stft(std::span<const double> samples, double sample_rate_hz, const AnalysisConfig& cfg);
inline Spectrogram stft(const Waveform& w, const AnalysisConfig& cfg) {
  validate(w);
  return stft(w.samples, w.sample_rate_hz, cfg);
}

/// Weighted overlap-add synthesis, truncated to `source_len`.
Waveform istft(const Spectrogram& s);

struct MagPhase {
  Matrix<double> magnitude;
  Matrix<double> phase;
};

MagPhase split_mag_phase(const Spectrogram& s);
/// Rebuilds a spectrogram from magnitude and phase, borrowing framing
/// metadata from `like`.
Spectrogram recombine(const Matrix<double>& magnitude, const Matrix<double>& phase,
                      const Spectrogram& like);

/// Centre frequency of one-sided bin k.
inline double bin_frequency(std::size_t k, std::size_t fft_size, double sample_rate_hz) {
  return static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
}

}  // namespace sefusion
