#include "sefusion/stsa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sefusion::stsa {

namespace {
// a-posteriori SNRs below this are evaluated at this value; the gain then
// stays finite and G * R still vanishes as R -> 0.
constexpr double kGammaMin = 1e-12;

void require_frequency(double f_hz, double fs_hz, const char* who) {
  if (!(fs_hz > 0.0)) throw DomainError(std::string(who) + ": sample rate must be positive");
  if (!(f_hz >= 0.0 && f_hz <= fs_hz / 2.0)) {
    throw DomainError(std::string(who) + ": frequency " + std::to_string(f_hz) +
                      " Hz outside [0, fs/2]");
  }
}
}  // namespace

void validate(const StsaParams& p) {
  if (!(p.mu_min >= 1.0)) throw ConfigError("stsa: mu_min must be >= 1");
  if (!(p.mu_max >= p.mu_min)) throw ConfigError("stsa: mu_max must be >= mu_min");
  if (!(p.beta_low > 0.0)) throw ConfigError("stsa: beta_low must be > 0");
  if (!(p.beta_high >= p.beta_low)) throw ConfigError("stsa: beta_high must be >= beta_low");
  const double alpha_max = std::max(p.alpha_low, p.alpha_high);
  if (!(p.mu_min - alpha_max > 0.0)) {
    throw ConfigError("stsa: Gamma-domain safety requires mu_min - alpha > 0 for every scheduled alpha");
  }
  if (!(p.beta_low / 2.0 + p.mu_min - alpha_max > 0.0)) {
    throw ConfigError("stsa: Gamma-domain safety requires beta/2 + mu_min - alpha > 0");
  }
  if (!(p.tonotopic_q > 0.0)) throw ConfigError("stsa: tonotopic_q must be > 0");
  if (!(p.tonotopic_l >= 1.0)) throw ConfigError("stsa: tonotopic_l must be >= 1");
  if (!(p.dd_smoothing > 0.0 && p.dd_smoothing < 1.0)) {
    throw ConfigError("stsa: dd_smoothing must lie in (0, 1)");
  }
  if (!(p.zeta_floor > 0.0)) throw ConfigError("stsa: zeta_floor must be > 0");
  if (!(p.zeta_norm_low_db < p.zeta_norm_high_db)) {
    throw ConfigError("stsa: zeta_norm range requires low < high");
  }
  specfun::validate(p.kummer);
}

double alpha_schedule(double f_hz, double fs_hz, const StsaParams& p) {
  require_frequency(f_hz, fs_hz, "alpha_schedule");
  constexpr double knee = 2000.0;
  if (f_hz <= knee) return p.alpha_low;
  return std::lerp(p.alpha_low, p.alpha_high, (f_hz - knee) / (fs_hz / 2.0 - knee));
}

double beta_schedule(double f_hz, double fs_hz, const StsaParams& p) {
  require_frequency(f_hz, fs_hz, "beta_schedule");
  if (!(p.tonotopic_l >= 1.0)) throw DomainError("beta_schedule: tonotopic_l must be >= 1");
  const double num = std::log10(f_hz / p.tonotopic_q + p.tonotopic_l);
  const double den = std::log10(fs_hz / (2.0 * p.tonotopic_q) + p.tonotopic_l);
  return std::lerp(p.beta_low, p.beta_high, num / den);
}

double mu_schedule(double zeta_norm, const StsaParams& p) {
  const double t = std::clamp(zeta_norm, 0.0, 1.0);
  return std::lerp(p.mu_min, p.mu_max, t);
}

double normalize_frame_snr(double zeta_frame_mean_db, double low_db, double high_db) {
  if (!(low_db < high_db)) throw DomainError("normalize_frame_snr: requires low < high");
  return std::clamp((zeta_frame_mean_db - low_db) / (high_db - low_db), 0.0, 1.0);
}

double dd_update(double prev_enhanced_mag, double prev_noise_psd, double gamma_now,
                 const StsaParams& p) {
  const double a = p.dd_smoothing;
  const double zeta = a * (prev_enhanced_mag * prev_enhanced_mag / prev_noise_psd) +
                      (1.0 - a) * std::max(gamma_now - 1.0, 0.0);
  return std::max(zeta, p.zeta_floor);
}

double gain(double zeta, double gamma, double alpha, double beta, double mu, const StsaParams& p) {
  if (!(zeta >= p.zeta_floor) || !std::isfinite(zeta)) {
    throw DomainError("gain: zeta must be finite and >= zeta_floor, got " + std::to_string(zeta));
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("gain: gamma must be finite and >= 0");
  }
  if (!(beta > 0.0)) throw DomainError("gain: beta must be > 0");
  if (!(mu - alpha > 0.0)) throw DomainError("gain: requires mu - alpha > 0");
  if (!(beta / 2.0 + mu - alpha > 0.0)) throw DomainError("gain: requires beta/2 + mu - alpha > 0");

  const double g = std::max(gamma, kGammaMin);
  const double nu = zeta / (mu + zeta) * g;
  const double m_num = specfun::kummer_m((2.0 - beta) / 2.0 + alpha - mu, -nu, p.kummer);
  const double m_den = specfun::kummer_m(1.0 + alpha - mu, -nu, p.kummer);
  if (!(m_num > 0.0) || !(m_den > 0.0)) {
    throw NumericError("gain: non-positive confluent hypergeometric value");
  }
  const double log_ratio = std::lgamma(beta / 2.0 + mu - alpha) - std::lgamma(mu - alpha) +
                           std::log(m_num) - std::log(m_den);
  double log_g = 0.5 * std::log(nu) + log_ratio / beta;
  if (!p.use_paper_prefactor) log_g -= std::log(g);
  const double out = std::exp(log_g);
  if (!std::isfinite(out)) throw NumericError("gain: overflow");
  return out;
}

Matrix<double> oracle_noise_psd(const Matrix<double>& noise_power, double smoothing) {
  Matrix<double> psd(noise_power.rows(), noise_power.cols());
  for (std::size_t p = 0; p < noise_power.rows(); ++p) {
    for (std::size_t k = 0; k < noise_power.cols(); ++k) {
      const double v = p == 0 ? noise_power(0, k)
                              : smoothing * psd(p - 1, k) + (1.0 - smoothing) * noise_power(p, k);
      psd(p, k) = std::max(v, kNoisePsdFloor);
    }
  }
  return psd;
}

Matrix<double> blind_noise_psd(const Matrix<double>& noisy_power, const BlindTrackerParams& bp) {
  const std::size_t frames = noisy_power.rows();
  const std::size_t bins = noisy_power.cols();
  Matrix<double> out(frames, bins);
  if (frames == 0) return out;

  const double prior_fact = bp.prior_speech_presence / (1.0 - bp.prior_speech_presence);
  const double xi_opt = std::pow(10.0, bp.xi_h1_db / 10.0);
  const double log_glr_fact = std::log(1.0 / (1.0 + xi_opt));
  const double glr_exp = xi_opt / (1.0 + xi_opt);

  std::vector<double> psd(bins, 0.0);
  const std::size_t init = std::clamp<std::size_t>(bp.init_frames, 1, frames);
  for (std::size_t p = 0; p < init; ++p) {
    for (std::size_t k = 0; k < bins; ++k) psd[k] += noisy_power(p, k) / static_cast<double>(init);
  }
  for (auto& v : psd) v = std::max(v, kNoisePsdFloor);

  std::vector<double> spp_mean(bins, 0.5);
  std::vector<std::size_t> stuck(bins, 0);
  for (std::size_t p = 0; p < frames; ++p) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double y = noisy_power(p, k);
      const double post = y / psd[k];
      // DC and Nyquist coefficients are real, so their likelihoods are
      // one-dimensional Gaussians: halve both exponents.
      const double dims = (k == 0 || k + 1 == bins) ? 0.5 : 1.0;
      const double glr =
          prior_fact * std::exp(std::min(dims * (log_glr_fact + glr_exp * post), 200.0));
      double ph1 = glr / (1.0 + glr);
      spp_mean[k] = bp.spp_smoothing * spp_mean[k] + (1.0 - bp.spp_smoothing) * ph1;
      if (spp_mean[k] > bp.stuck_threshold) {
        ph1 = std::min(ph1, bp.stuck_threshold);
        ++stuck[k];
      } else {
        stuck[k] = 0;
      }
      const double estimate = ph1 * psd[k] + (1.0 - ph1) * y;
      psd[k] = bp.psd_smoothing * psd[k] + (1.0 - bp.psd_smoothing) * estimate;
      if (stuck[k] >= bp.stuck_frames) {
        psd[k] = y;
        stuck[k] = 0;
      }
      psd[k] = std::max(psd[k], kNoisePsdFloor);
      out(p, k) = psd[k];
    }
  }
  return out;
}

Matrix<double> power_of(const Matrix<double>& magnitude) {
  Matrix<double> out(magnitude.rows(), magnitude.cols());
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    out.data()[i] = magnitude.data()[i] * magnitude.data()[i];
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> bin_schedules(std::size_t num_bins,
                                                                  double fs_hz,
                                                                  const StsaParams& p) {
  if (num_bins < 2) throw ShapeError("bin_schedules: need at least two bins");
  const std::size_t fft_size = 2 * (num_bins - 1);
  std::vector<double> alpha(num_bins);
  std::vector<double> beta(num_bins);
  for (std::size_t k = 0; k < num_bins; ++k) {
    const double f = bin_frequency(k, fft_size, fs_hz);
    alpha[k] = alpha_schedule(f, fs_hz, p);
    beta[k] = beta_schedule(f, fs_hz, p);
  }
  return {std::move(alpha), std::move(beta)};
}

double frame_mu(std::span<const double> zeta_row, const StsaParams& p) {
  double mean = 0.0;
  for (double z : zeta_row) mean += z;
  mean /= static_cast<double>(zeta_row.size());
  const double norm = normalize_frame_snr(10.0 * std::log10(mean), p.zeta_norm_low_db,
                                          p.zeta_norm_high_db);
  return mu_schedule(norm, p);
}

SnrTrack build_snr_track(const Matrix<double>& noisy_mag, const Matrix<double>& noise_psd,
                         double fs_hz, const StsaParams& p) {
  validate(p);
  require_same_shape(noisy_mag, noise_psd, "build_snr_track");
  const std::size_t frames = noisy_mag.rows();
  const std::size_t bins = noisy_mag.cols();
  const auto [alpha, beta] = bin_schedules(bins, fs_hz, p);

  SnrTrack t{Matrix<double>(frames, bins), Matrix<double>(frames, bins), noise_psd,
             std::vector<double>(frames)};
  std::vector<double> prev_mag(bins, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double r = noisy_mag(f, k);
      const double psd = noise_psd(f, k);
      t.gamma(f, k) = r * r / psd;
      const double prev_psd = f == 0 ? psd : noise_psd(f - 1, k);
      t.zeta(f, k) = dd_update(prev_mag[k], prev_psd, t.gamma(f, k), p);
    }
    t.mu[f] = frame_mu(t.zeta.row(f), p);
    for (std::size_t k = 0; k < bins; ++k) {
      prev_mag[k] =
          gain(t.zeta(f, k), t.gamma(f, k), alpha[k], beta[k], t.mu[f], p) * noisy_mag(f, k);
    }
  }
  return t;
}

Matrix<double> enhance_acoustic(const Matrix<double>& noisy_mag, const SnrTrack& track,
                                double fs_hz, const StsaParams& p) {
  validate(p);
  require_same_shape(noisy_mag, track.zeta, "enhance_acoustic");
  require_same_shape(noisy_mag, track.gamma, "enhance_acoustic");
  const auto [alpha, beta] = bin_schedules(noisy_mag.cols(), fs_hz, p);
  Matrix<double> out(noisy_mag.rows(), noisy_mag.cols());
  for (std::size_t f = 0; f < noisy_mag.rows(); ++f) {
    const double mu = frame_mu(track.zeta.row(f), p);
    for (std::size_t k = 0; k < noisy_mag.cols(); ++k) {
      const double r = noisy_mag(f, k);
      if (r == 0.0) continue;
      out(f, k) = gain(track.zeta(f, k), track.gamma(f, k), alpha[k], beta[k], mu, p) * r;
    }
  }
  return out;
}

}  // namespace sefusion::stsa
