#pragma once

#include <span>
#include <vector>

#include "sefusion/common.hpp"
#include "sefusion/dsp.hpp"

namespace sefusion::fusion {

enum class ContinuityMode { continuous, paper_literal };
enum class SnrScope { per_frame, per_bin };

struct FusionConfig {
  double low_break_db = 2.0;
  double high_break_db = 16.0;
  double weight_floor = 0.2;
  double weight_ceil = 0.8;
  ContinuityMode continuity = ContinuityMode::continuous;
  SnrScope scope = SnrScope::per_frame;
};

/// weight_floor == weight_ceil is accepted so the weight can be pinned.
void validate(const FusionConfig& cfg);

const char* to_string(ContinuityMode m);
const char* to_string(SnrScope s);
ContinuityMode continuity_from_string(const std::string& s);
SnrScope scope_from_string(const std::string& s);

constexpr double kPsiEpsilon = 1e-4;

/// psi = 10 log10(max(mean(gamma) - 1, eps)) over one frame.
double instantaneous_snr_db(std::span<const double> gamma_frame);
/// Same formula for a single bin.
double instantaneous_snr_db(double gamma);

double fusion_weight(double psi_db, const FusionConfig& cfg);

/// Fused magnitude with one weight per frame.
Matrix<double> fuse(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                    std::span<const double> psi_per_frame, const FusionConfig& cfg);
/// Fused magnitude with one weight per bin.
Matrix<double> fuse(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                    const Matrix<double>& psi_per_bin, const FusionConfig& cfg);

/// Fused magnitude from the a-posteriori SNR matrix, honoring `cfg.scope`.
Matrix<double> fuse_with_gamma(const Matrix<double>& acoustic, const Matrix<double>& modulation,
                               const Matrix<double>& gamma, const FusionConfig& cfg);

/// Noisy-phase synthesis of a magnitude estimate.
Waveform synthesize(const Matrix<double>& magnitude, const Matrix<double>& noisy_phase,
                    const Spectrogram& noisy);

}  // namespace sefusion::fusion
