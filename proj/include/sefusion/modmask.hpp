#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "sefusion/common.hpp"
#include "sefusion/dsp.hpp"

namespace sefusion::modmask {

/// Second-level STFT of every acoustic-bin magnitude trajectory.
struct ModulationSpectrogram {
  std::vector<Matrix<std::complex<double>>> coeffs;  // per acoustic bin k: [q x m]
  AnalysisConfig mod_config;
  double acoustic_frame_rate_hz = 62.5;
  std::size_t acoustic_frames = 0;  // trajectory length before padding
  std::size_t pad_frames = 0;       // reflected frames prepended to each trajectory

  std::size_t num_acoustic_bins() const { return coeffs.size(); }
  std::size_t num_mod_frames() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  std::size_t num_mod_bins() const { return mod_config.num_bins(); }
  double mod_bin_hz(std::size_t m) const {
    return bin_frequency(m, mod_config.fft_size, acoustic_frame_rate_hz);
  }
};

struct ModMaskParams {
  double eta_th_db = -10.0;
  double mc_hz = 4.0;
  bool keep_dc = true;
  double subtraction_floor = 0.01;
  std::size_t noise_frames_init = 8;
  /// Acoustic frames more than this far below the median frame energy are
  /// treated as speech-absent.
  double vad_margin_db = 15.0;
};

void validate(const ModMaskParams& p, double acoustic_frame_rate_hz);

constexpr double kModNoiseFloor = 1e-12;

/// Trajectories are reflect-padded by (window - hop) frames at both ends so
/// the utterance edges see full overlap.
ModulationSpectrogram modulation_stft(const Matrix<double>& acoustic_mag, const AnalysisConfig& cfg,
                                      double acoustic_frame_rate_hz);

/// Inverse of `modulation_stft`: returns the [frames x bins] trajectories
/// (unclamped).
Matrix<double> modulation_istft(const ModulationSpectrogram& ms);

/// Mean modulation power over the flagged frames, per (k, m), floored.
Matrix<double> noise_modulation_psd(const ModulationSpectrogram& noisy,
                                    const std::vector<bool>& speech_absent);

double mod_spectral_subtraction(double noisy_power, double noise_power, double floor);
double mod_snr(double clean_est_power, double noise_power);
/// 1 iff the modulation SNR clears eta_th and bin m lies at or below the
/// cutoff; m = 0 is always kept under keep_dc.
int binary_gain(double xi, std::size_t m_bin, const ModMaskParams& p, double frame_rate_hz,
                std::size_t mod_fft_size = 64);

/// Per-modulation-frame speech-absence flags from an acoustic frame-energy
/// VAD; a modulation frame is speech-absent when every acoustic frame under
/// its window is. Falls back to the first `noise_frames_init` frames when
/// the VAD finds none.
std::vector<bool> speech_absence_flags(const Matrix<double>& acoustic_mag,
                                       const ModulationSpectrogram& ms, const ModMaskParams& p);

struct ModulationResult {
  Matrix<double> magnitude;       // aligned with the acoustic frame grid
  double clamp_rate = 0.0;        // fraction of outputs clamped from below zero
  double retained_fraction = 0.0; // mask ones / total
};

/// Binary channel selection: retains noisy modulation coefficients where the
/// modulation SNR clears the threshold below the cutoff.
ModulationResult enhance_modulation(const Matrix<double>& acoustic_mag, const ModMaskParams& p,
                                    const AnalysisConfig& mod_cfg, double acoustic_frame_rate_hz);

/// Modulation-domain spectral subtraction baseline: subtracted magnitude with
/// the noisy modulation phase.
ModulationResult enhance_modulation_ssub(const Matrix<double>& acoustic_mag,
                                         const ModMaskParams& p, const AnalysisConfig& mod_cfg,
                                         double acoustic_frame_rate_hz);

}  // namespace sefusion::modmask
