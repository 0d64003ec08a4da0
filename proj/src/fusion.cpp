#include "sefusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sefusion::fusion {

void validate(const FusionConfig& cfg) {
  if (!(cfg.low_break_db < cfg.high_break_db)) {
    throw ConfigError("fusion: low_break_db must be < high_break_db");
  }
  if (!(cfg.weight_floor <= cfg.weight_ceil)) {
    throw ConfigError("fusion: weight_floor must be <= weight_ceil");
  }
  if (!(cfg.weight_floor >= 0.0 && cfg.weight_ceil <= 1.0)) {
    throw ConfigError("fusion: weights must lie in [0, 1]");
  }
}

const char* to_string(ContinuityMode m) {
  return m == ContinuityMode::continuous ? "continuous" : "paper_literal";
}
const char* to_string(SnrScope s) { return s == SnrScope::per_frame ? "per_frame" : "per_bin"; }

ContinuityMode continuity_from_string(const std::string& s) {
  if (s == "continuous") return ContinuityMode::continuous;
  if (s == "paper_literal") return ContinuityMode::paper_literal;
  throw ConfigError("unknown continuity_mode '" + s + "'");
}

SnrScope scope_from_string(const std::string& s) {
  if (s == "per_frame") return SnrScope::per_frame;
  if (s == "per_bin") return SnrScope::per_bin;
  throw ConfigError("unknown snr_scope '" + s + "'");
}

double instantaneous_snr_db(std::span<const double> gamma_frame) {
  double mean = 0.0;
  for (double g : gamma_frame) mean += g;
  mean /= static_cast<double>(gamma_frame.size());
  return instantaneous_snr_db(mean);
}

double instantaneous_snr_db(double gamma) {
  return 10.0 * std::log10(std::max(gamma - 1.0, kPsiEpsilon));
}

namespace {

// Convex combination, held inside [min(a, m), max(a, m)] against rounding.
double blend(double w, double a, double m) {
  const double v = w * a + (1.0 - w) * m;
  return std::clamp(v, std::min(a, m), std::max(a, m));
}

}  // namespace

double fusion_weight(double psi_db, const FusionConfig& cfg) {
  if (psi_db <= cfg.low_break_db) return cfg.weight_floor;
  if (psi_db >= cfg.high_break_db) return cfg.weight_ceil;
  const double t = (psi_db - cfg.low_break_db) / (cfg.high_break_db - cfg.low_break_db);
  if (cfg.continuity == ContinuityMode::paper_literal) return t;
  return cfg.weight_floor + (cfg.weight_ceil - cfg.weight_floor) * t;
}

Matrix<double> fuse(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                    std::span<const double> psi_per_frame, const FusionConfig& cfg) {
  require_same_shape(acoustic, modulation, "fuse");
  if (psi_per_frame.size() != acoustic.rows()) {
    throw ShapeError("fuse: " + std::to_string(psi_per_frame.size()) + " SNR values for " +
                     std::to_string(acoustic.rows()) + " frames");
  }
  Matrix<double> out(acoustic.rows(), acoustic.cols());
  for (std::size_t p = 0; p < acoustic.rows(); ++p) {
    const double w = fusion_weight(psi_per_frame[p], cfg);
    for (std::size_t k = 0; k < acoustic.cols(); ++k) {
      out(p, k) = blend(w, acoustic(p, k), modulation(p, k));
    }
  }
  return out;
}

Matrix<double> fuse(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                    const Matrix<double>& psi_per_bin, const FusionConfig& cfg) {
  require_same_shape(acoustic, modulation, "fuse");
  require_same_shape(acoustic, psi_per_bin, "fuse");
  Matrix<double> out(acoustic.rows(), acoustic.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = fusion_weight(psi_per_bin.data()[i], cfg);
    out.data()[i] = blend(w, acoustic.data()[i], modulation.data()[i]);
  }
  return out;
}

Matrix<double> fuse_with_gamma(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                               const Matrix<double>& gamma, const FusionConfig& cfg) {
  if (cfg.scope == SnrScope::per_bin) {
    Matrix<double> psi(gamma.rows(), gamma.cols());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi.data()[i] = instantaneous_snr_db(gamma.data()[i]);
    }
    return fuse(acoustic, modulation, psi, cfg);
  }
  std::vector<double> psi(gamma.rows());
  for (std::size_t p = 0; p < gamma.rows(); ++p) psi[p] = instantaneous_snr_db(gamma.row(p));
  return fuse(acoustic, modulation, psi, cfg);
}

Waveform synthesize(const Matrix<double>& magnitude, const Matrix<double>& noisy_phase,
                    const Spectrogram& noisy) {
  return istft(recombine(magnitude, noisy_phase, noisy));
}

}  // namespace sefusion::fusion
