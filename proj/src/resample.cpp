#include <cmath>
#include <numbers>
#include <numeric>

#include "sefusion/corpus.hpp"
#include "sefusion/specfun.hpp"

namespace sefusion::corpus {

namespace {

// Filter design targets: passband to 0.9 of the lower Nyquist frequency,
// stopband from the lower Nyquist frequency, 70 dB Kaiser design.
constexpr double kPassbandFraction = 0.9;
constexpr double kAttenuationDb = 70.0;

long integral_rate(double hz) {
  const double r = std::round(hz);
  if (!(hz > 0.0) || std::abs(hz - r) > 1e-9) {
    throw DomainError("resample_to: rates must be positive integers, got " + std::to_string(hz));
  }
  return static_cast<long>(r);
}

std::vector<double> design_lowpass(long up, double in_hz, double out_hz) {
  const double fast = static_cast<double>(up) * in_hz;
  const double nyquist = 0.5 * std::min(in_hz, out_hz);
  const double transition = (1.0 - kPassbandFraction) * nyquist;
  const double cutoff = nyquist - 0.5 * transition;
  const double d_omega = 2.0 * std::numbers::pi * transition / fast;
  auto taps = static_cast<std::size_t>(std::ceil((kAttenuationDb - 8.0) / (2.285 * d_omega))) + 1;
  if (taps % 2 == 0) ++taps;
  const double beta = 0.1102 * (kAttenuationDb - 8.7);
  const double i0_beta = specfun::bessel_i0(beta);
  const double centre = static_cast<double>(taps - 1) / 2.0;
  const double fc = cutoff / fast;  // cycles per fast-rate sample

  std::vector<double> h(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const double t = static_cast<double>(n) - centre;
    const double x = 2.0 * fc * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = t / centre;
    const double win = specfun::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = static_cast<double>(up) * 2.0 * fc * sinc * win;
  }
  return h;
}

}  // namespace

Waveform resample_to(const Waveform& w, double target_hz) {
  const long in_rate = integral_rate(w.sample_rate_hz);
  const long out_rate = integral_rate(target_hz);
  if (in_rate == out_rate) return w;

  const long g = std::gcd(in_rate, out_rate);
  const long up = out_rate / g;
  const long down = in_rate / g;
  const auto h = design_lowpass(up, static_cast<double>(in_rate), static_cast<double>(out_rate));
  const auto taps = static_cast<long>(h.size());
  const long centre = (taps - 1) / 2;
  const auto len = static_cast<long>(w.samples.size());

  Waveform out;
  out.sample_rate_hz = static_cast<double>(out_rate);
  const long out_len = (len * up + down - 1) / down;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (long n = 0; n < out_len; ++n) {
    const long t = n * down + centre;  // position on the upsampled grid
    long j_lo = t - (taps - 1) <= 0 ? 0 : (t - (taps - 1) + up - 1) / up;
    long j_hi = std::min(t / up, len - 1);
    double acc = 0.0;
    for (long j = j_lo; j <= j_hi; ++j) acc += w.samples[static_cast<std::size_t>(j)] * h[t - j * up];
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

}  // namespace sefusion::corpus
