#include <algorithm>
#include <vector>
#include <cmath>
#include <random>

#include "sefusion/corpus.hpp"

namespace sefusion::corpus {

namespace {

// ITU-T P.56 method B constants.
constexpr double kTimeConstantS = 0.03;
constexpr double kHangoverS = 0.2;
constexpr double kMarginDb = 15.9;
constexpr std::size_t kThresholds = 15;  // 2^-15 .. 2^-1 of full scale

struct Envelope {
  double g;
  double p = 0.0;
  double q = 0.0;
  explicit Envelope(double fs) : g(std::exp(-1.0 / (fs * kTimeConstantS))) {}
  double step(double x) {
    p = g * p + (1.0 - g) * std::abs(x);
    q = g * q + (1.0 - g) * p;
    return q;
  }
};

std::size_t hangover_samples(double fs) { return static_cast<std::size_t>(std::ceil(fs * kHangoverS)); }

}  // namespace

SpeechLevel active_speech_level(const Waveform& w) {
  validate(w);
  const double fs = w.sample_rate_hz;
  const std::size_t hang_max = hangover_samples(fs);

  double sq = 0.0;
  std::vector<double> env_q(w.samples.size());
  Envelope env(fs);
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    sq += w.samples[n] * w.samples[n];
    env_q[n] = env.step(w.samples[n]);
  }
  if (sq == 0.0) throw Error("active_speech_level: signal is silent");

  const auto count = [&](double c) {
    std::size_t active = 0, hang = hang_max;
    for (double q : env_q) {
      if (q >= c) {
        ++active;
        hang = 0;
      } else if (hang < hang_max) {
        ++active;
        ++hang;
      }
    }
    return active;
  };
  // Active level minus threshold minus margin, as a function of the threshold in dB.
  // Decreasing in c_db; -inf once nothing is active.
  const auto excess = [&](double c_db) {
    const std::size_t a = count(std::pow(10.0, c_db / 20.0));
    if (a == 0) return -HUGE_VAL;
    return 10.0 * std::log10(sq / static_cast<double>(a)) - c_db - kMarginDb;
  };

  const double lowest_db = 20.0 * std::log10(std::ldexp(1.0, -15));
  if (count(std::ldexp(1.0, -15)) == 0) throw Error("active_speech_level: signal is silent");
  if (excess(lowest_db) < 0.0) {
    throw Error("active_speech_level: signal too quiet for the lowest activity threshold");
  }
  // Bracket on the 2^-15 .. 2^-1 ladder, then bisect between the rungs.
  double lo = lowest_db, hi = lowest_db;
  bool bracketed = false;
  for (std::size_t j = 1; j < kThresholds; ++j) {
    hi = 20.0 * std::log10(std::ldexp(1.0, static_cast<int>(j) - 15));
    if (excess(hi) <= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
  }
  if (!bracketed) throw NumericError("active_speech_level: no threshold satisfies the margin");
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) lo = mid;
    else hi = mid;
  }

  SpeechLevel lvl;
  lvl.threshold = std::pow(10.0, lo / 20.0);
  lvl.asl_db = 10.0 * std::log10(sq / static_cast<double>(count(lvl.threshold)));
  const double mean_power = sq / static_cast<double>(w.samples.size());
  lvl.activity_factor = mean_power / std::pow(10.0, lvl.asl_db / 10.0);
  return lvl;
}

std::vector<bool> activity_mask(const Waveform& w, double threshold) {
  const std::size_t hang_max = hangover_samples(w.sample_rate_hz);
  std::vector<bool> mask(w.samples.size(), false);
  Envelope env(w.sample_rate_hz);
  std::size_t hang = hang_max;
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    if (env.step(w.samples[n]) >= threshold) {
      mask[n] = true;
      hang = 0;
    } else if (hang < hang_max) {
      mask[n] = true;
      ++hang;
    }
  }
  return mask;
}

MixResult mix_signals(const Waveform& clean, const Waveform& noise, double snr_db,
                      const std::variant<FixedOffset, SeededRandomOffset>& offset,
                      double lead_noise_ms) {
  validate(clean);
  validate(noise);
  if (!std::isfinite(snr_db)) throw DomainError("mix: snr_db must be finite");
  if (!(lead_noise_ms >= 0.0)) throw DomainError("mix: lead_noise_ms must be >= 0");
  if (clean.sample_rate_hz != noise.sample_rate_hz) {
    throw DomainError("mix: clean and noise sample rates differ");
  }
  const double fs = clean.sample_rate_hz;
  const auto lead = static_cast<std::size_t>(std::lround(lead_noise_ms * fs / 1000.0));
  const std::size_t total = lead + clean.size();
  if (noise.size() < total) {
    throw Error("mix: noise has " + std::to_string(noise.size()) + " samples, need at least " +
                std::to_string(total));
  }
  const std::size_t slack = noise.size() - total;
  std::size_t start = 0;
  if (const auto* f = std::get_if<FixedOffset>(&offset)) {
    if (f->samples > slack) throw Error("mix: fixed noise offset runs past the end of the noise");
    start = f->samples;
  } else {
    std::mt19937_64 rng(std::get<SeededRandomOffset>(offset).seed);
    start = static_cast<std::size_t>(rng() % (slack + 1));
  }

  MixResult r;
  r.noise_offset = start;
  r.lead_samples = lead;
  r.clean_aligned.sample_rate_hz = fs;
  r.clean_aligned.samples.assign(total, 0.0);
  std::copy(clean.samples.begin(), clean.samples.end(),
            r.clean_aligned.samples.begin() + static_cast<std::ptrdiff_t>(lead));

  const SpeechLevel level = active_speech_level(clean);
  const auto mask = activity_mask(r.clean_aligned, level.threshold);
  double noise_power = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < total; ++n) {
    if (!mask[n]) continue;
    const double v = noise.samples[start + n];
    noise_power += v * v;
    ++count;
  }
  if (count == 0 || noise_power == 0.0) throw Error("mix: noise is silent over the active span");
  noise_power /= static_cast<double>(count);

  r.noise_gain = std::sqrt(std::pow(10.0, level.asl_db / 10.0) /
                           (noise_power * std::pow(10.0, snr_db / 10.0)));
  r.noise_scaled.sample_rate_hz = fs;
  r.noise_scaled.samples.resize(total);
  r.noisy.sample_rate_hz = fs;
  r.noisy.samples.resize(total);
  for (std::size_t n = 0; n < total; ++n) {
    r.noise_scaled.samples[n] = r.noise_gain * noise.samples[start + n];
    r.noisy.samples[n] = r.clean_aligned.samples[n] + r.noise_scaled.samples[n];
  }
  return r;
}

MixResult mix_at_snr(const MixSpec& spec) {
  const Waveform clean = resample_to(read_wav(spec.clean_path), spec.target_rate_hz);
  const Waveform noise = resample_to(read_wav(spec.noise_path), spec.target_rate_hz);
  return mix_signals(clean, noise, spec.snr_db, spec.offset, spec.lead_noise_ms);
}

}  // namespace sefusion::corpus
