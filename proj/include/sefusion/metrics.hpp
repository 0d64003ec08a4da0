#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sefusion/common.hpp"
#include "sefusion/dsp.hpp"

namespace sefusion::metrics {

struct MetricReport {
  std::string utterance_id;
  std::string noise_type;
  double snr_db = 0.0;
  std::string method;
  double estoi = 0.0;       // [-1, 1], not clamped
  double seg_snr_db = 0.0;  // [-10, 35]
};

// ESTOI front-end constants (Jensen & Taal, 2016).
constexpr double kEstoiRateHz = 10000.0;
constexpr std::size_t kEstoiFrameLen = 256;
constexpr std::size_t kEstoiFftSize = 512;
constexpr std::size_t kEstoiBands = 15;
constexpr double kEstoiLowestCentreHz = 150.0;
constexpr std::size_t kEstoiSegmentFrames = 30;  // 384 ms
constexpr double kEstoiDynamicRangeDb = 40.0;

/// One-third octave band matrix [bands x (fft/2+1)] with 0/1 entries. Bands
/// whose bin count stops growing at the top of the spectrum are dropped.
Matrix<double> third_octave_bands(double fs_hz, std::size_t fft_size, std::size_t num_bands,
                                  double lowest_centre_hz);

/// Drops frames whose clean energy lies more than `dyn_range_db` below the
/// loudest clean frame and re-synthesizes both signals by overlap-add.
std::pair<std::vector<double>, std::vector<double>> remove_silent_frames(
    const std::vector<double>& clean, const std::vector<double>& processed, double dyn_range_db,
    std::size_t frame_len, std::size_t hop);

/// Extended short-time objective intelligibility. Both signals must share
/// length and rate. Throws if fewer than one 384 ms segment of non-silent
/// clean signal survives.
double estoi(const Waveform& clean, const Waveform& processed);

constexpr double kSegSnrFloorDb = -10.0;
constexpr double kSegSnrCeilDb = 35.0;

/// Mean per-frame SNR over non-overlapping 32 ms frames, each clamped to
/// [-10, 35] dB. Frames whose clean energy is 40 dB below the loudest
/// frame are skipped.
double segmental_snr(const Waveform& clean, const Waveform& processed);

}  // namespace sefusion::metrics
