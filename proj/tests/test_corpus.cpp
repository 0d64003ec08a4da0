#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "sefusion/corpus.hpp"
#include "sefusion/synth.hpp"
#include "support.hpp"

using namespace sefusion;
using namespace sefusion::corpus;

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

// Hand-assembled PCM WAV; `declared_data` lets the header lie.
std::vector<std::uint8_t> make_wav(const std::vector<std::int16_t>& samples, std::uint16_t channels,
                                   std::uint32_t declared_data, std::uint16_t format = 1,
                                   std::uint16_t bits = 16) {
  std::vector<std::uint8_t> b;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, channels);
  put_u32(b, 16000);
  put_u32(b, 16000u * channels * bits / 8);
  put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, declared_data);
  for (auto s : samples) put_u16(b, static_cast<std::uint16_t>(s));
  return b;
}

Waveform tone(double f, double amp, double fs, double seconds) {
  Waveform w{std::vector<double>(static_cast<std::size_t>(seconds * fs)), fs};
  for (std::size_t n = 0; n < w.size(); ++n) {
    w.samples[n] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) / fs);
  }
  return w;
}

// Least-squares amplitude and frequency of a sinusoid: coarse grid, then
// golden-section refinement of the projection energy.
std::pair<double, double> fit_sinusoid(const std::vector<double>& x, double fs, double f0) {
  const auto energy = [&](double f) {
    double c = 0.0, s = 0.0, cc = 0.0, ss = 0.0, cs = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double ph = 2.0 * std::numbers::pi * f * static_cast<double>(n) / fs;
      const double cn = std::cos(ph), sn = std::sin(ph);
      c += x[n] * cn;
      s += x[n] * sn;
      cc += cn * cn;
      ss += sn * sn;
      cs += cn * sn;
    }
    const double det = cc * ss - cs * cs;
    const double a = (c * ss - s * cs) / det;
    const double b = (s * cc - c * cs) / det;
    return std::pair{a * c + b * s, std::hypot(a, b)};
  };
  double lo = f0 - 2.0, hi = f0 + 2.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (energy(m1).first > energy(m2).first) hi = m2;
    else lo = m1;
  }
  const double f = 0.5 * (lo + hi);
  return {f, energy(f).second};
}

double rms_db(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return 10.0 * std::log10(s / static_cast<double>(to - from));
}

}  // namespace

TEST_CASE("wav: decoding scale and edge values") {
  const auto w = decode_wav(make_wav({-32768, 0, 16384, 32767}, 1, 8));
  REQUIRE(w.size() == 4);
  CHECK(w.samples[0] == -1.0);
  CHECK(w.samples[1] == 0.0);
  CHECK(w.samples[2] == 0.5);
  CHECK(w.samples[3] == 32767.0 / 32768.0);
  CHECK(w.sample_rate_hz == 16000.0);
}

TEST_CASE("wav: encode/decode round trip is bit-exact") {
  std::vector<std::int16_t> s;
  for (int i = -32768; i < 32768; i += 97) s.push_back(static_cast<std::int16_t>(i));
  const auto bytes = make_wav(s, 1, static_cast<std::uint32_t>(s.size() * 2));
  CHECK(encode_wav(decode_wav(bytes)) == bytes);

  testing::TempDir dir("wav");
  const auto path = dir.path / "x.wav";
  const auto w = decode_wav(bytes);
  write_wav(path, w);
  CHECK(read_wav(path).samples == w.samples);
}

TEST_CASE("wav: clipping is counted") {
  WriteReport rep;
  const auto bytes = encode_wav(Waveform{{0.5, 1.5, -2.0, 0.99998}, 16000.0}, &rep);
  CHECK(rep.clipped == 2);
  const auto back = decode_wav(bytes);
  CHECK(back.samples[1] == 32767.0 / 32768.0);
  CHECK(back.samples[2] == -1.0);
}

TEST_CASE("wav: malformed input") {
  try {
    decode_wav(make_wav({1, 2, 3}, 1, 100), "t.wav");
    FAIL("expected WavError");
  } catch (const WavError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("100") != std::string::npos);
    CHECK(msg.find("6") != std::string::npos);
    CHECK(msg.find("t.wav") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_wav(make_wav({1, 2, 3, 4}, 2, 8)), UnsupportedWavError);
  CHECK_THROWS_AS(decode_wav(make_wav({1, 2}, 1, 4, 3)), UnsupportedWavError);
  CHECK_THROWS_AS(decode_wav(make_wav({1, 2}, 1, 4, 1, 24)), UnsupportedWavError);
  std::vector<std::uint8_t> junk(40, 0);
  CHECK_THROWS_AS(decode_wav(junk), WavError);
  CHECK_THROWS_AS(read_wav("/nonexistent/sefusion.wav"), IoError);
}

TEST_CASE("resample: identity pass-through") {
  const auto x = testing::random_signal(1000, 3);
  const Waveform w{x, 16000.0};
  CHECK(resample_to(w, 16000.0).samples == x);
}

TEST_CASE("resample: 1 kHz tone from 48 kHz to 16 kHz") {
  const auto in = tone(1000.0, 0.5, 48000.0, 1.0);
  const auto out = resample_to(in, 16000.0);
  CHECK(out.sample_rate_hz == 16000.0);
  CHECK(out.size() == 16000);
  const std::vector<double> mid(out.samples.begin() + 2000, out.samples.end() - 2000);
  const auto [f, amp] = fit_sinusoid(mid, 16000.0, 1000.0);
  CHECK(std::abs(f - 1000.0) < 0.1);
  CHECK(std::abs(20.0 * std::log10(amp / 0.5)) < 0.1);
}

TEST_CASE("resample: passband ripple and stopband attenuation") {
  for (double f : {200.0, 3000.0, 7000.0}) {
    const auto out = resample_to(tone(f, 0.5, 48000.0, 0.5), 16000.0);
    const std::vector<double> mid(out.samples.begin() + 1000, out.samples.end() - 1000);
    const auto [ff, amp] = fit_sinusoid(mid, 16000.0, f);
    CHECK(std::abs(20.0 * std::log10(amp / 0.5)) < 0.1);
  }
  for (double f : {9000.0, 12000.0, 20000.0}) {
    const auto out = resample_to(tone(f, 0.5, 48000.0, 0.5), 16000.0);
    const double level = rms_db(out.samples, 1000, out.size() - 1000);
    const double ref = 20.0 * std::log10(0.5 / std::sqrt(2.0));
    CHECK(level - ref < -60.0);
  }
}

TEST_CASE("resample: 16k -> 48k -> 16k round trip") {
  // Content well inside the passband so neither filter touches it.
  Waveform x{std::vector<double>(16000, 0.0), 16000.0};
  for (double f : {150.0, 730.0, 1900.0, 3300.0, 5200.0}) {
    const auto t = tone(f, 0.15, 16000.0, 1.0);
    for (std::size_t n = 0; n < x.size(); ++n) x.samples[n] += t.samples[n];
  }
  const auto back = resample_to(resample_to(x, 48000.0), 16000.0);
  REQUIRE(back.size() == x.size());
  CHECK(testing::relative_interior_error(x.samples, back.samples, 200) < 1e-3);
  CHECK_THROWS_AS(resample_to(x, 0.0), DomainError);
}

TEST_CASE("active speech level") {
  // Long enough that hangover and envelope decay (~0.28 s) stay small.
  const auto s = tone(440.0, 0.3, 16000.0, 4.0);
  const auto lvl = active_speech_level(s);
  const double rms = 20.0 * std::log10(0.3 / std::sqrt(2.0));
  CHECK(std::abs(lvl.asl_db - rms) < 0.5);
  CHECK(lvl.activity_factor > 0.95);

  Waveform padded = s;
  padded.samples.resize(2 * s.size(), 0.0);
  const auto lp = active_speech_level(padded);
  CHECK(std::abs(lp.asl_db - lvl.asl_db) < 0.5);
  CHECK(std::abs(lp.activity_factor - 0.5) < 0.05);

  const auto x = synth::speech_like(7);
  const auto base = active_speech_level(x);
  Waveform g = x;
  for (double& v : g.samples) v *= 0.1;
  CHECK(std::abs(active_speech_level(g).asl_db - (base.asl_db - 20.0)) < 0.1);
  Waveform xs = x;
  xs.samples.resize(x.size() + 16000, 0.0);
  CHECK(std::abs(active_speech_level(xs).asl_db - base.asl_db) < 0.5);

  CHECK_THROWS_AS(active_speech_level(Waveform{std::vector<double>(1000, 0.0), 16000.0}), Error);
}

TEST_CASE("mix: re-measured SNR on the fixture set") {
  for (const char* noise : {"white", "pink", "babble"}) {
    for (std::uint64_t i = 0; i < 3; ++i) {
      for (double snr : {0.0, 5.0, 10.0}) {
        const auto m = testing::fixture_mix(i, snr, noise);
        const auto lvl = active_speech_level(m.clean_aligned);
        const auto mask = activity_mask(m.clean_aligned, lvl.threshold);
        double p = 0.0;
        std::size_t c = 0;
        for (std::size_t n = 0; n < mask.size(); ++n) {
          if (!mask[n]) continue;
          p += m.noise_scaled.samples[n] * m.noise_scaled.samples[n];
          ++c;
        }
        const double measured = lvl.asl_db - 10.0 * std::log10(p / static_cast<double>(c));
        INFO(noise << " utt " << i << " snr " << snr);
        CHECK(std::abs(measured - snr) < 0.1);
      }
    }
  }
}

TEST_CASE("mix: structure and determinism") {
  const auto a = testing::fixture_mix(1, 5.0);
  const auto b = testing::fixture_mix(1, 5.0);
  CHECK(a.noisy.samples == b.noisy.samples);
  CHECK(a.lead_samples == 4800);
  for (std::size_t n = 0; n < a.lead_samples; ++n) CHECK(a.clean_aligned.samples[n] == 0.0);
  for (std::size_t n = 0; n < a.noisy.size(); ++n) {
    CHECK(a.noisy.samples[n] == a.clean_aligned.samples[n] + a.noise_scaled.samples[n]);
  }
  const auto clean = synth::speech_like(1);
  const auto noise = synth::white_noise(3, clean.duration_s() + 1.0);
  CHECK_THROWS_AS(mix_signals(clean, noise, INFINITY, SeededRandomOffset{1}, 300.0), DomainError);
  CHECK_THROWS_AS(mix_signals(clean, synth::white_noise(3, 1.0), 5.0, SeededRandomOffset{1}, 300.0),
                  Error);
  const auto fixed = mix_signals(clean, noise, 5.0, FixedOffset{100}, 300.0);
  CHECK(fixed.noise_offset == 100);
  CHECK_THROWS_AS(mix_signals(clean, noise, 5.0, FixedOffset{100000}, 300.0), Error);
}
