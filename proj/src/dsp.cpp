#include "sefusion/dsp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sefusion/fft.hpp"

namespace sefusion {

void validate(const Waveform& w) {
  if (!(w.sample_rate_hz > 0.0) || !std::isfinite(w.sample_rate_hz)) {
    throw DomainError("waveform: sample rate must be positive");
  }
  if (w.samples.empty()) throw DomainError("waveform: empty signal");
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw DomainError("waveform: non-finite sample");
  }
}

const char* to_string(WindowKind k) {
  switch (k) {
    case WindowKind::hamming: return "hamming";
    case WindowKind::hann: return "hann";
    case WindowKind::rectangular: return "rectangular";
  }
  return "?";
}

WindowKind window_kind_from_string(const std::string& s) {
  if (s == "hamming") return WindowKind::hamming;
  if (s == "hann") return WindowKind::hann;
  if (s == "rectangular") return WindowKind::rectangular;
  throw ConfigError("unknown window kind '" + s + "'");
}

AnalysisConfig acoustic_default() { return {512, 256, 512, WindowKind::hamming}; }
AnalysisConfig modulation_default() { return {16, 2, 64, WindowKind::hamming}; }

void validate(const AnalysisConfig& cfg) {
  if (cfg.hop == 0 || cfg.window_len == 0 || cfg.fft_size == 0) {
    throw ConfigError("analysis config: sizes must be positive");
  }
  if (!(cfg.hop <= cfg.window_len && cfg.window_len <= cfg.fft_size)) {
    throw ConfigError("analysis config: requires hop <= window_len <= fft_size");
  }
  if ((cfg.fft_size & (cfg.fft_size - 1)) != 0 || cfg.fft_size < 2) {
    throw ConfigError("analysis config: fft_size must be a power of two");
  }
}

std::vector<double> make_window(WindowKind kind, std::size_t len) {
  std::vector<double> w(len, 1.0);
  const double n = static_cast<double>(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    switch (kind) {
      case WindowKind::hamming: w[i] = 0.54 - 0.46 * c; break;
      case WindowKind::hann: w[i] = 0.5 - 0.5 * c; break;
      case WindowKind::rectangular: break;
    }
  }
  return w;
}

std::size_t frame_count(std::size_t source_len, const AnalysisConfig& cfg) {
  if (source_len < cfg.window_len) {
    throw FramingError("signal of " + std::to_string(source_len) +
                       " samples is shorter than one analysis window (" +
                       std::to_string(cfg.window_len) + ")");
  }
  const std::size_t excess = source_len - cfg.window_len;
  return 1 + (excess + cfg.hop - 1) / cfg.hop;
}

std::size_t padded_length(std::size_t source_len, const AnalysisConfig& cfg) {
  return cfg.window_len + (frame_count(source_len, cfg) - 1) * cfg.hop;
}

Spectrogram stft(std::span<const double> samples, double sample_rate_hz, const AnalysisConfig& cfg) {
  validate(cfg);
  const std::size_t frames = frame_count(samples.size(), cfg);
  const auto window = make_window(cfg.window, cfg.window_len);

  Spectrogram out;
  out.config = cfg;
  out.source_len = samples.size();
  out.sample_rate_hz = sample_rate_hz;
  out.coeffs = Matrix<std::complex<double>>(frames, cfg.num_bins());

  RealFft fft(cfg.fft_size);
  std::vector<double> frame(cfg.window_len);
  for (std::size_t p = 0; p < frames; ++p) {
    const std::size_t start = p * cfg.hop;
    for (std::size_t i = 0; i < cfg.window_len; ++i) {
      const std::size_t n = start + i;
      frame[i] = n < samples.size() ? samples[n] * window[i] : 0.0;
    }
    fft.forward(frame, out.coeffs.row(p));
  }
  return out;
}

Waveform istft(const Spectrogram& s) {
  const auto& cfg = s.config;
  validate(cfg);
  if (s.coeffs.cols() != cfg.num_bins()) {
    throw ShapeError("istft: " + std::to_string(s.coeffs.cols()) + " bins, config expects " +
                     std::to_string(cfg.num_bins()));
  }
  if (s.coeffs.rows() != frame_count(s.source_len, cfg)) {
    throw ShapeError("istft: frame count " + std::to_string(s.coeffs.rows()) +
                     " inconsistent with source length " + std::to_string(s.source_len));
  }
  const auto window = make_window(cfg.window, cfg.window_len);
  const std::size_t total = padded_length(s.source_len, cfg);
  std::vector<double> acc(total, 0.0);
  std::vector<double> norm(total, 0.0);

  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.fft_size);
  for (std::size_t p = 0; p < s.coeffs.rows(); ++p) {
    fft.inverse(s.coeffs.row(p), buf);
    const std::size_t start = p * cfg.hop;
    for (std::size_t i = 0; i < cfg.window_len; ++i) {
      acc[start + i] += window[i] * buf[i];
      norm[start + i] += window[i] * window[i];
    }
  }

  Waveform out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.samples.resize(s.source_len);
  for (std::size_t n = 0; n < s.source_len; ++n) {
    // Only reachable with windows that vanish at their edges (hann).
    out.samples[n] = norm[n] > 1e-12 ? acc[n] / norm[n] : 0.0;
  }
  return out;
}

MagPhase split_mag_phase(const Spectrogram& s) {
  MagPhase mp{Matrix<double>(s.coeffs.rows(), s.coeffs.cols()),
              Matrix<double>(s.coeffs.rows(), s.coeffs.cols())};
  const auto& c = s.coeffs.data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    mp.magnitude.data()[i] = std::abs(c[i]);
    mp.phase.data()[i] = c[i] == std::complex<double>{} ? 0.0 : std::arg(c[i]);
  }
  return mp;
}

Spectrogram recombine(const Matrix<double>& magnitude, const Matrix<double>& phase,
                      const Spectrogram& like) {
  require_same_shape(magnitude, phase, "recombine");
  require_same_shape(magnitude, like.coeffs, "recombine");
  Spectrogram out;
  out.config = like.config;
  out.source_len = like.source_len;
  out.sample_rate_hz = like.sample_rate_hz;
  out.coeffs = Matrix<std::complex<double>>(magnitude.rows(), magnitude.cols());
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    const double m = magnitude.data()[i];
    const double ph = phase.data()[i];
    out.coeffs.data()[i] = {m * std::cos(ph), m * std::sin(ph)};
  }
  return out;
}

}  // namespace sefusion
