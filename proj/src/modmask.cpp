#include "sefusion/modmask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sefusion::modmask {

void validate(const ModMaskParams& p, double acoustic_frame_rate_hz) {
  if (std::isnan(p.eta_th_db)) throw ConfigError("modmask: eta_th_db is NaN");
  if (!(p.mc_hz >= 0.0)) throw ConfigError("modmask: mc_hz must be >= 0");
  if (!(p.mc_hz <= acoustic_frame_rate_hz / 2.0)) {
    throw ConfigError("modmask: mc_hz must not exceed the modulation Nyquist frequency (" +
                      std::to_string(acoustic_frame_rate_hz / 2.0) + " Hz)");
  }
  if (!(p.subtraction_floor > 0.0 && p.subtraction_floor < 1.0)) {
    throw ConfigError("modmask: subtraction_floor must lie in (0, 1)");
  }
  if (p.noise_frames_init == 0) throw ConfigError("modmask: noise_frames_init must be >= 1");
}

namespace {

// Reflection about the first and last samples (edge not repeated).
std::size_t reflect_index(std::ptrdiff_t j, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (j < 0) j = -j;
  if (j > last) j = 2 * last - j;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, last));
}

std::size_t tail_pad(std::size_t frames, std::size_t pad, const AnalysisConfig& cfg) {
  // Extend the tail reflection so the padded length fits the framing exactly.
  std::size_t tail = pad;
  while ((frames + pad + tail - cfg.window_len) % cfg.hop != 0) ++tail;
  return tail;
}

}  // namespace

ModulationSpectrogram modulation_stft(const Matrix<double>& acoustic_mag, const AnalysisConfig& cfg,
                                      double acoustic_frame_rate_hz) {
  validate(cfg);
  const std::size_t frames = acoustic_mag.rows();
  if (frames < cfg.window_len) {
    throw FramingError("modulation_stft: " + std::to_string(frames) +
                       " acoustic frames, need at least one modulation window (" +
                       std::to_string(cfg.window_len) + ")");
  }
  const std::size_t pad = cfg.window_len - cfg.hop;
  const std::size_t tail = tail_pad(frames, pad, cfg);
  const std::size_t padded = frames + pad + tail;

  ModulationSpectrogram ms;
  ms.mod_config = cfg;
  ms.acoustic_frame_rate_hz = acoustic_frame_rate_hz;
  ms.acoustic_frames = frames;
  ms.pad_frames = pad;
  ms.coeffs.reserve(acoustic_mag.cols());

  std::vector<double> traj(padded);
  for (std::size_t k = 0; k < acoustic_mag.cols(); ++k) {
    for (std::size_t i = 0; i < padded; ++i) {
      const auto j = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad);
      traj[i] = acoustic_mag(reflect_index(j, frames), k);
    }
    ms.coeffs.push_back(stft(traj, acoustic_frame_rate_hz, cfg).coeffs);
  }
  return ms;
}

Matrix<double> modulation_istft(const ModulationSpectrogram& ms) {
  const std::size_t frames = ms.acoustic_frames;
  const std::size_t padded = frames + ms.pad_frames + tail_pad(frames, ms.pad_frames, ms.mod_config);
  Matrix<double> out(frames, ms.num_acoustic_bins());
  for (std::size_t k = 0; k < ms.num_acoustic_bins(); ++k) {
    Spectrogram s{ms.coeffs[k], ms.mod_config, padded, ms.acoustic_frame_rate_hz};
    const Waveform traj = istft(s);
    for (std::size_t p = 0; p < frames; ++p) out(p, k) = traj.samples[p + ms.pad_frames];
  }
  return out;
}

Matrix<double> noise_modulation_psd(const ModulationSpectrogram& noisy,
                                    const std::vector<bool>& speech_absent) {
  if (speech_absent.size() != noisy.num_mod_frames()) {
    throw ShapeError("noise_modulation_psd: " + std::to_string(speech_absent.size()) +
                     " flags for " + std::to_string(noisy.num_mod_frames()) + " modulation frames");
  }
  const auto count = std::count(speech_absent.begin(), speech_absent.end(), true);
  if (count == 0) throw Error("noise_modulation_psd: no speech-absent modulation frames");

  Matrix<double> psd(noisy.num_acoustic_bins(), noisy.num_mod_bins());
  for (std::size_t k = 0; k < noisy.num_acoustic_bins(); ++k) {
    const auto& c = noisy.coeffs[k];
    for (std::size_t q = 0; q < c.rows(); ++q) {
      if (!speech_absent[q]) continue;
      for (std::size_t m = 0; m < c.cols(); ++m) psd(k, m) += std::norm(c(q, m));
    }
    for (std::size_t m = 0; m < psd.cols(); ++m) {
      psd(k, m) = std::max(psd(k, m) / static_cast<double>(count), kModNoiseFloor);
    }
  }
  return psd;
}

double mod_spectral_subtraction(double noisy_power, double noise_power, double floor) {
  if (!(noisy_power >= 0.0) || !(noise_power >= 0.0)) {
    throw DomainError("mod_spectral_subtraction: powers must be >= 0");
  }
  return std::max(noisy_power - noise_power, floor * noisy_power);
}

double mod_snr(double clean_est_power, double noise_power) {
  if (!(noise_power > 0.0)) throw DomainError("mod_snr: noise power must be > 0");
  return clean_est_power / noise_power;
}

int binary_gain(double xi, std::size_t m_bin, const ModMaskParams& p, double frame_rate_hz,
                std::size_t mod_fft_size) {
  if (m_bin == 0 && p.keep_dc) return 1;
  const double bin_hz = bin_frequency(m_bin, mod_fft_size, frame_rate_hz);
  const double xi_db = 10.0 * std::log10(xi);
  return (xi_db >= p.eta_th_db && bin_hz <= p.mc_hz) ? 1 : 0;
}

std::vector<bool> speech_absence_flags(const Matrix<double>& acoustic_mag,
                                       const ModulationSpectrogram& ms, const ModMaskParams& p) {
  const std::size_t frames = acoustic_mag.rows();
  std::vector<double> energy(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (double v : acoustic_mag.row(f)) energy[f] += v * v;
  }
  std::vector<double> sorted = energy;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(frames / 2),
                   sorted.end());
  const double median = sorted[frames / 2];
  const double threshold = median * std::pow(10.0, -p.vad_margin_db / 10.0);

  std::vector<bool> absent(ms.num_mod_frames(), false);
  const auto& cfg = ms.mod_config;
  bool any = false;
  for (std::size_t q = 0; q < absent.size(); ++q) {
    bool all_quiet = true;
    for (std::size_t i = 0; i < cfg.window_len && all_quiet; ++i) {
      const auto j = static_cast<std::ptrdiff_t>(q * cfg.hop + i) -
                     static_cast<std::ptrdiff_t>(ms.pad_frames);
      all_quiet = energy[reflect_index(j, frames)] < threshold;
    }
    absent[q] = all_quiet;
    any = any || all_quiet;
  }
  if (!any) {
    const std::size_t n = std::min(p.noise_frames_init, absent.size());
    std::fill(absent.begin(), absent.begin() + static_cast<std::ptrdiff_t>(n), true);
  }
  return absent;
}

namespace {

enum class Rule { mask, subtract };

ModulationResult run(const Matrix<double>& acoustic_mag, const ModMaskParams& p,
                     const AnalysisConfig& mod_cfg, double rate, Rule rule) {
  validate(p, rate);
  ModulationSpectrogram ms = modulation_stft(acoustic_mag, mod_cfg, rate);
  const auto flags = speech_absence_flags(acoustic_mag, ms, p);
  const Matrix<double> noise = noise_modulation_psd(ms, flags);

  std::size_t kept = 0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < ms.num_acoustic_bins(); ++k) {
    auto& c = ms.coeffs[k];
    for (std::size_t q = 0; q < c.rows(); ++q) {
      for (std::size_t m = 0; m < c.cols(); ++m) {
        const double power = std::norm(c(q, m));
        const double clean = mod_spectral_subtraction(power, noise(k, m), p.subtraction_floor);
        if (rule == Rule::mask) {
          const int g = binary_gain(mod_snr(clean, noise(k, m)), m, p, rate, mod_cfg.fft_size);
          kept += static_cast<std::size_t>(g);
          if (g == 0) c(q, m) = 0.0;
        } else if (power > 0.0) {
          c(q, m) *= std::sqrt(clean / power);
        }
        ++total;
      }
    }
  }

  ModulationResult r;
  r.magnitude = modulation_istft(ms);
  std::size_t clamped = 0;
  for (double& v : r.magnitude.data()) {
    if (v < 0.0) {
      v = 0.0;
      ++clamped;
    }
  }
  r.clamp_rate = r.magnitude.empty() ? 0.0
                                     : static_cast<double>(clamped) /
                                           static_cast<double>(r.magnitude.size());
  r.retained_fraction =
      rule == Rule::mask && total > 0 ? static_cast<double>(kept) / static_cast<double>(total) : 1.0;
  return r;
}

}  // namespace

ModulationResult enhance_modulation(const Matrix<double>& acoustic_mag, const ModMaskParams& p,
                                    const AnalysisConfig& mod_cfg, double acoustic_frame_rate_hz) {
  return run(acoustic_mag, p, mod_cfg, acoustic_frame_rate_hz, Rule::mask);
}

ModulationResult enhance_modulation_ssub(const Matrix<double>& acoustic_mag,
                                         const ModMaskParams& p, const AnalysisConfig& mod_cfg,
                                         double acoustic_frame_rate_hz) {
  return run(acoustic_mag, p, mod_cfg, acoustic_frame_rate_hz, Rule::subtract);
}

}  // namespace sefusion::modmask
