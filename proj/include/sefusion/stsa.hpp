#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sefusion/common.hpp"
#include "sefusion/dsp.hpp"
#include "sefusion/specfun.hpp"

namespace sefusion::stsa {

struct StsaParams {
  double alpha_low = 0.0;
  double alpha_high = 0.5;
  double beta_low = 0.2;
  double beta_high = 1.0;
  double mu_min = 1.0;
  double mu_max = 3.0;
  double tonotopic_q = 16.54;
  double tonotopic_l = 1.0;
  double dd_smoothing = 0.98;
  double zeta_floor = 0.0031622776601683794;  // -25 dB
  double zeta_norm_low_db = -15.0;
  double zeta_norm_high_db = 20.0;
  /// Use the prefactor sqrt(nu) exactly as printed instead of sqrt(nu)/gamma.
  /// Only meant for side-by-side comparison; it does not yield a bounded gain.
  bool use_paper_prefactor = false;
  specfun::KummerEvalPolicy kummer{};
};

/// Rejects configurations whose scheduled (alpha, beta, mu) could leave the
/// Gamma-function domain anywhere on the frequency axis.
void validate(const StsaParams& p);

/// Per-bin SNR bookkeeping for one utterance, all linear, [frames x bins].
struct SnrTrack {
  Matrix<double> zeta;       // a-priori SNR
  Matrix<double> gamma;      // a-posteriori SNR
  Matrix<double> noise_psd;  // noise power
  std::vector<double> mu;    // per-frame shape parameter
};

double alpha_schedule(double f_hz, double fs_hz, const StsaParams& p);
double beta_schedule(double f_hz, double fs_hz, const StsaParams& p);
double mu_schedule(double zeta_norm, const StsaParams& p);
double normalize_frame_snr(double zeta_frame_mean_db, double low_db, double high_db);

/// Decision-directed a-priori SNR estimate, floored at `p.zeta_floor`.
double dd_update(double prev_enhanced_mag, double prev_noise_psd, double gamma_now,
                 const StsaParams& p);

/// Parametric Bayesian STSA gain under the chi-type speech prior.
double gain(double zeta, double gamma, double alpha, double beta, double mu,
            const StsaParams& p = {});

// --- noise PSD tracking -------------------------------------------------------

constexpr double kNoisePsdFloor = 1e-10;

/// Recursively smoothed periodogram of the true noise (smoothing 0.9).
Matrix<double> oracle_noise_psd(const Matrix<double>& noise_power, double smoothing = 0.9);

struct BlindTrackerParams {
  double prior_speech_presence = 0.5;
  double xi_h1_db = 15.0;         // fixed a-priori SNR under speech presence
  double psd_smoothing = 0.8;
  double spp_smoothing = 0.9;
  double stuck_threshold = 0.99;
  std::size_t stuck_frames = 50;  // full update after this many stuck frames
  std::size_t init_frames = 5;
};

/// Speech-presence-probability weighted MMSE noise tracker.
Matrix<double> blind_noise_psd(const Matrix<double>& noisy_power, const BlindTrackerParams& p = {});

Matrix<double> power_of(const Matrix<double>& magnitude);

// --- per-utterance processing ---------------------------------------------------

/// Per-bin alpha and beta for a one-sided spectrum of `num_bins` bins.
std::pair<std::vector<double>, std::vector<double>> bin_schedules(std::size_t num_bins,
                                                                  double fs_hz,
                                                                  const StsaParams& p);

/// Runs the decision-directed recursion frame by frame. The previous frame's
/// enhanced magnitude feeds the next frame's a-priori SNR, so this also
/// evaluates the gain; `enhance_acoustic` recomputes the same values.
SnrTrack build_snr_track(const Matrix<double>& noisy_mag, const Matrix<double>& noise_psd,
                         double fs_hz, const StsaParams& p);

/// Shape parameter for a frame from its a-priori SNR row.
double frame_mu(std::span<const double> zeta_row, const StsaParams& p);

Matrix<double> enhance_acoustic(const Matrix<double>& noisy_mag, const SnrTrack& track,
                                double fs_hz, const StsaParams& p);

}  // namespace sefusion::stsa
