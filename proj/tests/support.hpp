#pragma once

// Shared helpers for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sefusion/corpus.hpp"
#include "sefusion/dsp.hpp"
#include "sefusion/synth.hpp"

namespace testing {

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

/// ||a - b|| / ||a|| over [skip, size - skip).
inline double relative_interior_error(const std::vector<double>& a, const std::vector<double>& b,
                                      std::size_t skip) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = skip; i + skip < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num / den);
}

inline double relative_error(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("sefusion_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// Fixture utterance `i` mixed with white noise at `snr_db`.
inline sefusion::corpus::MixResult fixture_mix(std::uint64_t i, double snr_db,
                                               const std::string& noise = "white") {
  using namespace sefusion;
  const Waveform clean = synth::speech_like(i);
  const double noise_s = clean.duration_s() + 1.0;
  Waveform n;
  if (noise == "white") n = synth::white_noise(100 + i, noise_s);
  else if (noise == "pink") n = synth::pink_noise(100 + i, noise_s);
  else n = synth::babble_noise(100 + i, noise_s);
  return corpus::mix_signals(clean, n, snr_db, corpus::SeededRandomOffset{i}, 300.0);
}

/// Drops the first `ms` milliseconds.
inline sefusion::Waveform trim_lead(const sefusion::Waveform& w, double ms) {
  sefusion::Waveform t;
  t.sample_rate_hz = w.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::lround(ms * w.sample_rate_hz / 1000.0));
  t.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(std::min(n, w.size())),
                   w.samples.end());
  return t;
}

}  // namespace testing
