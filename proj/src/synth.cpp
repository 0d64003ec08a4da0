#include "sefusion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sefusion::synth {

Rng::Rng(std::uint64_t seed) : state_(seed) {}

double Rng::uniform() {
  // splitmix64: fixed arithmetic, so sequences match on every platform.
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

struct Resonator {
  double a1 = 0.0, a2 = 0.0, b0 = 1.0, y1 = 0.0, y2 = 0.0;
  Resonator(double freq, double bandwidth, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth / fs);
    a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    a2 = -r * r;
    b0 = 1.0 - r;
  }
  double step(double x) {
    const double y = b0 * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double raised_envelope(double t, double dur) {
  const double edge = 0.3 * dur;
  if (t < edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * t / edge);
  if (t > dur - edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * (dur - t) / edge);
  return 1.0;
}

void normalize_peak(Waveform& w, double peak) {
  double m = 0.0;
  for (double v : w.samples) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : w.samples) v *= peak / m;
  }
}

// Adds `seg` at `start`, scaled to the given RMS so that every syllable
// lands near a speech-like level regardless of the resonator gains.
void add_scaled(std::vector<double>& out, std::size_t start, const std::vector<double>& seg,
                double rms) {
  double ss = 0.0;
  for (double v : seg) ss += v * v;
  if (ss <= 0.0) return;
  const double scale = rms / std::sqrt(ss / static_cast<double>(seg.size()));
  for (std::size_t i = 0; i < seg.size() && start + i < out.size(); ++i) out[start + i] += scale * seg[i];
}

void add_voiced(std::vector<double>& out, std::size_t start, std::size_t len, double fs, Rng& rng) {
  const double f0_start = rng.uniform(100.0, 200.0);
  const double f0_end = f0_start * rng.uniform(0.8, 1.2);
  Resonator f1(rng.uniform(300.0, 800.0), 80.0, fs);
  Resonator f2(rng.uniform(900.0, 2200.0), 100.0, fs);
  Resonator f3(rng.uniform(2300.0, 3200.0), 150.0, fs);
  const double level_db = rng.uniform(-6.0, 0.0);
  const double dur = static_cast<double>(len) / fs;
  std::vector<double> seg(len);
  double phase = 0.0;
  double glottal = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 = f0_start + (f0_end - f0_start) * t / dur;
    phase += f0 / fs;
    double pulse = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      pulse = 1.0;
    }
    glottal = 0.9 * glottal + pulse + 0.02 * rng.normal();
    // Parallel formants keep the spectral envelope from collapsing onto one
    // peak when two resonances come close.
    const double v = f1.step(glottal) + 0.5 * f2.step(glottal) + 0.25 * f3.step(glottal);
    seg[i] = raised_envelope(t, dur) * v;
  }
  add_scaled(out, start, seg, 0.1 * std::pow(10.0, level_db / 20.0));
}

void add_fricative(std::vector<double>& out, std::size_t start, std::size_t len, double fs, Rng& rng) {
  Resonator band(rng.uniform(3500.0, std::min(6000.0, 0.4 * fs)), 1500.0, fs);
  const double level_db = rng.uniform(-18.0, -10.0);
  const double dur = static_cast<double>(len) / fs;
  std::vector<double> seg(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / fs;
    seg[i] = raised_envelope(t, dur) * band.step(rng.normal());
  }
  add_scaled(out, start, seg, 0.1 * std::pow(10.0, level_db / 20.0));
}

}  // namespace

Waveform speech_like(std::uint64_t seed, double duration_s, double fs) {
  Rng rng(seed * 7919 + 17);
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.assign(static_cast<std::size_t>(duration_s * fs), 0.0);
  const double edge_s = 0.1;
  double t = edge_s;
  while (t < duration_s - edge_s - 0.06) {
    const bool fricative = rng.uniform() < 0.2;
    double seg = fricative ? rng.uniform(0.06, 0.12) : rng.uniform(0.12, 0.28);
    seg = std::min(seg, duration_s - edge_s - t);
    const auto start = static_cast<std::size_t>(t * fs);
    const auto len = static_cast<std::size_t>(seg * fs);
    if (fricative) {
      add_fricative(w.samples, start, len, fs, rng);
    } else {
      add_voiced(w.samples, start, len, fs, rng);
    }
    t += seg;
    const double u = rng.uniform();
    if (u < 0.1) {
      t += rng.uniform(0.3, 0.4);
    } else if (u < 0.6) {
      t += rng.uniform(0.03, 0.2);
    }
  }
  normalize_peak(w, 0.5);
  return w;
}

Waveform white_noise(std::uint64_t seed, double duration_s, double fs) {
  Rng rng(seed * 104729 + 3);
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.resize(static_cast<std::size_t>(duration_s * fs));
  for (double& v : w.samples) v = 0.1 * rng.normal();
  return w;
}

Waveform pink_noise(std::uint64_t seed, double duration_s, double fs) {
  Rng rng(seed * 1299709 + 5);
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.resize(static_cast<std::size_t>(duration_s * fs));
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (double& v : w.samples) {
    const double white = rng.normal();
    b0 = 0.99886 * b0 + white * 0.0555179;
    b1 = 0.99332 * b1 + white * 0.0750759;
    b2 = 0.96900 * b2 + white * 0.1538520;
    b3 = 0.86650 * b3 + white * 0.3104856;
    b4 = 0.55000 * b4 + white * 0.5329522;
    b5 = -0.7616 * b5 - white * 0.0168980;
    v = 0.02 * (b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362);
    b6 = white * 0.115926;
  }
  return w;
}

Waveform babble_noise(std::uint64_t seed, double duration_s, double fs) {
  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.assign(static_cast<std::size_t>(duration_s * fs), 0.0);
  for (std::uint64_t talker = 0; talker < 6; ++talker) {
    const Waveform t = speech_like(seed * 1000 + talker + 1, duration_s, fs);
    for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] += t.samples[i];
  }
  normalize_peak(w, 0.5);
  return w;
}

}  // namespace sefusion::synth
