#include "sefusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "sefusion/corpus.hpp"
#include "sefusion/fft.hpp"

namespace sefusion::metrics {

namespace {

// hann(N + 2) with the two zero endpoints removed.
std::vector<double> trimmed_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  }
  return w;
}

void require_pair(const Waveform& clean, const Waveform& processed, const char* what) {
  validate(clean);
  validate(processed);
  if (clean.size() != processed.size()) {
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(clean.size()) +
                     " vs " + std::to_string(processed.size()) + ")");
  }
  if (clean.sample_rate_hz != processed.sample_rate_hz) {
    throw DomainError(std::string(what) + ": sample rates differ");
  }
}

// Band envelopes [frames x bands] of the framed signal.
Matrix<double> band_envelopes(const std::vector<double>& x, const Matrix<double>& obm) {
  const auto win = trimmed_hann(kEstoiFrameLen);
  const std::size_t hop = kEstoiFrameLen / 2;
  std::size_t frames = 0;
  if (x.size() > kEstoiFrameLen) frames = (x.size() - kEstoiFrameLen + hop - 1) / hop;
  RealFft fft(kEstoiFftSize);
  std::vector<double> buf(kEstoiFrameLen);
  std::vector<std::complex<double>> spec(fft.num_bins());
  Matrix<double> env(frames, obm.rows());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < kEstoiFrameLen; ++i) buf[i] = win[i] * x[t * hop + i];
    fft.forward(buf, spec);
    for (std::size_t b = 0; b < obm.rows(); ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < obm.cols(); ++k) {
        if (obm(b, k) != 0.0) acc += std::norm(spec[k]);
      }
      env(t, b) = std::sqrt(acc);
    }
  }
  return env;
}

// Zero-mean, unit-norm normalization of a strided vector; a vector with no
// spread becomes all zeros.
void normalize(double* v, std::size_t n, std::size_t stride) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += v[i * stride];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i * stride] -= mean;
    ss += v[i * stride] * v[i * stride];
  }
  const double norm = std::sqrt(ss);
  const double scale = norm > 0.0 ? 1.0 / norm : 0.0;
  for (std::size_t i = 0; i < n; ++i) v[i * stride] *= scale;
}

// Segment [bands x N] copied from frames [m, m + N), then normalized over
// time within each band and afterwards across bands within each frame.
std::vector<double> normalized_segment(const Matrix<double>& env, std::size_t m) {
  const std::size_t bands = env.cols();
  const std::size_t n = kEstoiSegmentFrames;
  std::vector<double> seg(bands * n);
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t t = 0; t < n; ++t) seg[b * n + t] = env(m + t, b);
  }
  for (std::size_t b = 0; b < bands; ++b) normalize(seg.data() + b * n, n, 1);
  for (std::size_t t = 0; t < n; ++t) normalize(seg.data() + t, bands, n);
  return seg;
}

}  // namespace

Matrix<double> third_octave_bands(double fs_hz, std::size_t fft_size, std::size_t num_bands,
                                  double lowest_centre_hz) {
  const std::size_t bins = fft_size / 2 + 1;
  std::vector<double> f(bins);
  for (std::size_t k = 0; k < bins; ++k) f[k] = fs_hz * static_cast<double>(k) / static_cast<double>(fft_size);
  auto nearest = [&](double target) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < bins; ++k) {
      if (std::abs(f[k] - target) < std::abs(f[best] - target)) best = k;
    }
    return best;
  };
  Matrix<double> obm(num_bands, bins);
  std::vector<double> rank(num_bands, 0.0);
  for (std::size_t i = 0; i < num_bands; ++i) {
    const double k = static_cast<double>(i);
    const std::size_t lo = nearest(lowest_centre_hz * std::pow(2.0, (2.0 * k - 1.0) / 6.0));
    const std::size_t hi = nearest(lowest_centre_hz * std::pow(2.0, (2.0 * k + 1.0) / 6.0));
    for (std::size_t j = lo; j < hi; ++j) obm(i, j) = 1.0;
    rank[i] = static_cast<double>(hi > lo ? hi - lo : 0);
  }
  // Keep bands up to the last one whose width still grows.
  std::size_t keep = 0;
  for (std::size_t i = 1; i < num_bands; ++i) {
    if (rank[i] >= rank[i - 1] && rank[i] != 0.0) keep = i + 1;
  }
  if (keep == 0) throw DomainError("third_octave_bands: no usable band at this rate");
  if (keep == num_bands) return obm;
  Matrix<double> trimmed(keep, bins);
  for (std::size_t i = 0; i < keep; ++i) {
    std::copy(obm.row(i).begin(), obm.row(i).end(), trimmed.row(i).begin());
  }
  return trimmed;
}

std::pair<std::vector<double>, std::vector<double>> remove_silent_frames(
    const std::vector<double>& clean, const std::vector<double>& processed, double dyn_range_db,
    std::size_t frame_len, std::size_t hop) {
  const auto win = trimmed_hann(frame_len);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + frame_len < clean.size(); s += hop) starts.push_back(s);
  std::vector<double> energy_db(starts.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < starts.size(); ++f) {
    double ss = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) {
      const double v = win[i] * clean[starts[f] + i];
      ss += v * v;
    }
    energy_db[f] = 20.0 * std::log10(std::sqrt(ss) + std::numeric_limits<double>::epsilon());
    peak = std::max(peak, energy_db[f]);
  }
  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < starts.size(); ++f) {
    if (peak - dyn_range_db - energy_db[f] < 0.0) kept.push_back(starts[f]);
  }
  if (kept.empty()) return {};
  const std::size_t out_len = (kept.size() - 1) * hop + frame_len;
  std::vector<double> xc(out_len, 0.0);
  std::vector<double> xp(out_len, 0.0);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    for (std::size_t i = 0; i < frame_len; ++i) {
      xc[j * hop + i] += win[i] * clean[kept[j] + i];
      xp[j * hop + i] += win[i] * processed[kept[j] + i];
    }
  }
  return {std::move(xc), std::move(xp)};
}

double estoi(const Waveform& clean, const Waveform& processed) {
  require_pair(clean, processed, "estoi");
  if (std::all_of(clean.samples.begin(), clean.samples.end(), [](double v) { return v == 0.0; })) {
    throw DomainError("estoi: clean signal is silent");
  }
  const Waveform c = corpus::resample_to(clean, kEstoiRateHz);
  const Waveform p = corpus::resample_to(processed, kEstoiRateHz);
  auto [xc, xp] = remove_silent_frames(c.samples, p.samples, kEstoiDynamicRangeDb, kEstoiFrameLen,
                                       kEstoiFrameLen / 2);
  if (xc.empty()) throw DomainError("estoi: clean signal is silent");

  const auto obm = third_octave_bands(kEstoiRateHz, kEstoiFftSize, kEstoiBands, kEstoiLowestCentreHz);
  const auto ex = band_envelopes(xc, obm);
  const auto ey = band_envelopes(xp, obm);
  if (ex.rows() < kEstoiSegmentFrames) {
    throw FramingError("estoi: " + std::to_string(ex.rows()) + " non-silent frames, need at least " +
                       std::to_string(kEstoiSegmentFrames));
  }
  const std::size_t segments = ex.rows() - kEstoiSegmentFrames + 1;
  double total = 0.0;
  for (std::size_t m = 0; m < segments; ++m) {
    const auto sx = normalized_segment(ex, m);
    const auto sy = normalized_segment(ey, m);
    double dot = 0.0;
    for (std::size_t i = 0; i < sx.size(); ++i) dot += sx[i] * sy[i];
    total += dot / static_cast<double>(kEstoiSegmentFrames);
  }
  return total / static_cast<double>(segments);
}

double segmental_snr(const Waveform& clean, const Waveform& processed) {
  require_pair(clean, processed, "segmental_snr");
  const auto frame = static_cast<std::size_t>(std::lround(0.032 * clean.sample_rate_hz));
  const std::size_t frames = clean.size() / frame;
  if (frames == 0) throw FramingError("segmental_snr: signal shorter than one 32 ms frame");
  std::vector<double> signal(frames), error(frames);
  double peak = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    double s = 0.0, e = 0.0;
    for (std::size_t i = f * frame; i < (f + 1) * frame; ++i) {
      const double d = clean.samples[i] - processed.samples[i];
      s += clean.samples[i] * clean.samples[i];
      e += d * d;
    }
    signal[f] = s;
    error[f] = e;
    peak = std::max(peak, s);
  }
  if (peak == 0.0) throw DomainError("segmental_snr: clean signal is silent");
  const double floor = peak * std::pow(10.0, -kEstoiDynamicRangeDb / 10.0);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    if (signal[f] < floor) continue;
    double snr = kSegSnrCeilDb;
    if (error[f] > 0.0) snr = std::clamp(10.0 * std::log10(signal[f] / error[f]), kSegSnrFloorDb, kSegSnrCeilDb);
    sum += snr;
    ++used;
  }
  return sum / static_cast<double>(used);
}

}  // namespace sefusion::metrics
