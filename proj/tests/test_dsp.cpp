#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sefusion/dsp.hpp"
#include "sefusion/fft.hpp"
#include "support.hpp"

using namespace sefusion;
using testing::random_signal;
using testing::relative_interior_error;

TEST_CASE("fft: inverse undoes forward and carries the 1/N factor") {
  RealFft fft(64);
  const auto x = random_signal(64, 1);
  std::vector<std::complex<double>> X(fft.num_bins());
  fft.forward(x, X);
  double dc = 0.0;
  for (double v : x) dc += v;
  CHECK(X[0].real() == doctest::Approx(dc).epsilon(1e-12));
  std::vector<double> y(64);
  fft.inverse(X, y);
  for (std::size_t i = 0; i < 64; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
  CHECK_THROWS_AS(RealFft(48), DomainError);
}

TEST_CASE("stft: bin-centred tone with a rectangular window stays in one bin") {
  AnalysisConfig cfg{512, 256, 512, WindowKind::rectangular};
  const std::size_t len = 512 + 10 * 256;  // no tail padding
  std::vector<double> x(len);
  for (std::size_t n = 0; n < len; ++n) x[n] = std::cos(2.0 * std::numbers::pi * 32.0 * n / 512.0);
  const auto s = stft(x, 16000.0, cfg);
  CHECK(s.num_frames() == 11);
  for (std::size_t p = 0; p < s.num_frames(); ++p) {
    const double peak = std::abs(s.coeffs(p, 32));
    CHECK(peak == doctest::Approx(256.0).epsilon(1e-9));
    for (std::size_t k = 0; k < s.num_bins(); ++k) {
      if (k != 32) CHECK(std::abs(s.coeffs(p, k)) < 1e-9 * peak);
    }
  }
}

TEST_CASE("stft: zero signal gives zero coefficients") {
  const auto s = stft(std::vector<double>(4000, 0.0), 16000.0, acoustic_default());
  for (const auto& c : s.coeffs.data()) CHECK(c == std::complex<double>(0.0, 0.0));
}

TEST_CASE("framing arithmetic") {
  const auto cfg = acoustic_default();
  // Exact fit: 1 + (15872 - 512) / 256 frames, nothing padded.
  CHECK(frame_count(15872, cfg) == 61);
  CHECK(padded_length(15872, cfg) == 15872);
  // 16000 samples leave a 128-sample tail, which gets one zero-padded frame.
  CHECK(frame_count(16000, cfg) == 62);
  CHECK(padded_length(16000, cfg) == 16128);
  CHECK(frame_count(512, cfg) == 1);
  CHECK(frame_count(513, cfg) == 2);
  CHECK_THROWS_AS(frame_count(511, cfg), FramingError);
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.1), 16000.0, cfg), FramingError);
}

TEST_CASE("istft: round trip for every supported window/hop pair") {
  struct Case {
    AnalysisConfig cfg;
    std::size_t len;
  };
  const Case cases[] = {
      {acoustic_default(), 16000},
      {{512, 256, 512, WindowKind::hann}, 16000},
      {{512, 512, 512, WindowKind::rectangular}, 16000},
      {{512, 128, 1024, WindowKind::hamming}, 9000},
      {modulation_default(), 300},
      {{16, 4, 32, WindowKind::hann}, 301},
  };
  for (const auto& c : cases) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto x = random_signal(c.len, seed + 10);
      const auto y = istft(stft(x, 16000.0, c.cfg));
      REQUIRE(y.samples.size() == x.size());
      CHECK(relative_interior_error(x, y.samples, c.cfg.window_len) < 1e-6);
    }
  }
}

TEST_CASE("istft: zero spectrogram and linearity") {
  const auto cfg = acoustic_default();
  const auto x = random_signal(8000, 3);
  auto s = stft(x, 16000.0, cfg);
  const auto y = istft(s);
  for (auto& c : s.coeffs.data()) c *= 2.5;
  const auto y2 = istft(s);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y2.samples[i] == doctest::Approx(2.5 * y.samples[i]).epsilon(1e-12));
  for (auto& c : s.coeffs.data()) c = 0.0;
  for (double v : istft(s).samples) CHECK(v == 0.0);
}

TEST_CASE("istft: rejects a coefficient matrix that disagrees with the config") {
  auto s = stft(random_signal(4000, 4), 16000.0, acoustic_default());
  s.coeffs = Matrix<std::complex<double>>(s.num_frames(), 100);
  CHECK_THROWS_AS(istft(s), ShapeError);
}

TEST_CASE("stft: Parseval per frame with unnormalized forward transform") {
  const auto cfg = acoustic_default();
  const auto x = random_signal(4096, 5);
  const auto s = stft(x, 16000.0, cfg);
  const auto w = make_window(cfg.window, cfg.window_len);
  for (std::size_t p = 0; p < s.num_frames(); ++p) {
    double time_energy = 0.0;
    for (std::size_t i = 0; i < cfg.window_len; ++i) {
      const std::size_t n = p * cfg.hop + i;
      const double v = n < x.size() ? w[i] * x[n] : 0.0;
      time_energy += v * v;
    }
    double spec_energy = 0.0;
    for (std::size_t k = 0; k < s.num_bins(); ++k) {
      const double weight = (k == 0 || k == s.num_bins() - 1) ? 1.0 : 2.0;
      spec_energy += weight * std::norm(s.coeffs(p, k));
    }
    spec_energy /= static_cast<double>(cfg.fft_size);
    CHECK(spec_energy == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("stft: linearity and determinism") {
  const auto cfg = acoustic_default();
  const auto a = random_signal(5000, 6);
  const auto b = random_signal(5000, 7);
  std::vector<double> mix(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mix[i] = 0.7 * a[i] - 1.3 * b[i];
  const auto sa = stft(a, 16000.0, cfg);
  const auto sb = stft(b, 16000.0, cfg);
  const auto sm = stft(mix, 16000.0, cfg);
  for (std::size_t i = 0; i < sm.coeffs.size(); ++i) {
    const auto want = 0.7 * sa.coeffs.data()[i] - 1.3 * sb.coeffs.data()[i];
    CHECK(std::abs(sm.coeffs.data()[i] - want) <= 1e-10 * (1.0 + std::abs(want)));
  }
  CHECK(stft(a, 16000.0, cfg).coeffs == sa.coeffs);
}

TEST_CASE("split_mag_phase / recombine") {
  Spectrogram s;
  s.config = {4, 2, 4, WindowKind::hann};
  s.source_len = 4;
  s.coeffs = Matrix<std::complex<double>>(1, 3);
  s.coeffs(0, 0) = {3.0, 4.0};
  s.coeffs(0, 1) = {0.0, 0.0};
  s.coeffs(0, 2) = {-1.0, 0.0};
  const auto mp = split_mag_phase(s);
  CHECK(mp.magnitude(0, 0) == 5.0);
  CHECK(mp.phase(0, 0) == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(mp.magnitude(0, 1) == 0.0);
  CHECK(mp.phase(0, 1) == 0.0);

  const auto r = stft(random_signal(3000, 8), 16000.0, acoustic_default());
  const auto back = recombine(split_mag_phase(r).magnitude, split_mag_phase(r).phase, r);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    num += std::norm(back.coeffs.data()[i] - r.coeffs.data()[i]);
    den += std::norm(r.coeffs.data()[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-12);
  CHECK_THROWS_AS(recombine(Matrix<double>(2, 2), Matrix<double>(2, 2), r), ShapeError);
}

TEST_CASE("config validation and windows") {
  CHECK_THROWS_AS(validate(AnalysisConfig{512, 600, 512, WindowKind::hamming}), ConfigError);
  CHECK_THROWS_AS(validate(AnalysisConfig{512, 256, 500, WindowKind::hamming}), ConfigError);
  CHECK_THROWS_AS(validate(AnalysisConfig{1024, 256, 512, WindowKind::hamming}), ConfigError);
  CHECK_NOTHROW(validate(modulation_default()));
  CHECK(modulation_default().num_bins() == 33);
  const auto w = make_window(WindowKind::hamming, 8);
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[4] == doctest::Approx(1.0));
  CHECK(window_kind_from_string("hann") == WindowKind::hann);
  CHECK_THROWS_AS(window_kind_from_string("kaiser"), ConfigError);
  Waveform bad{{0.0, std::nan("")}, 16000.0};
  CHECK_THROWS_AS(validate(bad), DomainError);
  CHECK_THROWS_AS(validate(Waveform{{}, 16000.0}), DomainError);
}
