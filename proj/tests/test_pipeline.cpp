#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "sefusion/pipeline.hpp"
#include "support.hpp"

using namespace sefusion;
using namespace sefusion::pipeline;

namespace {

EnhancementConfig with_mode(Mode m) {
  EnhancementConfig c;
  c.mode = m;
  return c;
}

bool all_finite(const Waveform& w) {
  for (double v : w.samples) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("default configuration carries the published parameter set") {
  const EnhancementConfig c;
  CHECK(c.acoustic.window_len == 512);
  CHECK(c.acoustic.hop == 256);
  CHECK(c.acoustic.fft_size == 512);
  CHECK(c.acoustic.window == WindowKind::hamming);
  CHECK(c.modulation.window_len == 16);
  CHECK(c.modulation.hop == 2);
  CHECK(c.modulation.fft_size == 64);
  CHECK(c.modmask.eta_th_db == -10.0);
  CHECK(c.modmask.mc_hz == 4.0);
  CHECK(c.stsa.mu_min == 1.0);
  CHECK(c.stsa.mu_max == 3.0);
  CHECK(c.stsa.tonotopic_q == 16.54);
  CHECK(c.fusion.low_break_db == 2.0);
  CHECK(c.fusion.high_break_db == 16.0);
  CHECK(c.mode == Mode::fusion);
  CHECK(c.noise_psd_mode == NoisePsdMode::oracle);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("validate: cross-module checks") {
  EnhancementConfig c;
  c.modulation = {32, 4, 64, WindowKind::hamming};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.modmask.mc_hz = 31.25;  // equal to the modulation Nyquist frequency
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.stsa.alpha_high = 1.2;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.fusion.weight_floor = c.fusion.weight_ceil = 1.0;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("json round trip and strictness") {
  EnhancementConfig c;
  c.stsa.alpha_high = 0.4;
  c.modmask.eta_th_db = -7.5;
  c.fusion.continuity = fusion::ContinuityMode::paper_literal;
  c.fusion.scope = fusion::SnrScope::per_bin;
  c.mode = Mode::modssub_only;
  c.noise_psd_mode = NoisePsdMode::blind;
  c.blind_tracker.stuck_frames = 33;
  const auto j = to_json(c);
  const auto back = from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.stsa.alpha_high == 0.4);
  CHECK(back.mode == Mode::modssub_only);

  const auto partial = from_json(nlohmann::json::parse(R"({"modmask": {"mc_hz": 3.0}})"));
  CHECK(partial.modmask.mc_hz == 3.0);
  CHECK(partial.modmask.eta_th_db == -10.0);

  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"modmsk": {}})")), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"stsa": {"alpha_hi": 0.3}})")), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"stsa": {"alpha_high": "x"}})")), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"mode": "turbo"})")), ConfigError);

  testing::TempDir dir("cfg");
  const auto path = dir.path / "c.json";
  std::ofstream(path) << "// comment\n{\"fusion\": {\"weight_ceil\": 0.7}}\n";
  CHECK(load_config(path).fusion.weight_ceil == 0.7);
  CHECK_THROWS_AS(load_config(dir.path / "missing.json"), Error);
}

TEST_CASE("enhance: pinned fusion weight collapses onto the single paths") {
  const auto mix = testing::fixture_mix(0, 5.0);
  auto one = with_mode(Mode::fusion);
  one.fusion.weight_floor = one.fusion.weight_ceil = 1.0;
  auto zero = with_mode(Mode::fusion);
  zero.fusion.weight_floor = zero.fusion.weight_ceil = 0.0;
  const auto a = enhance(mix.noisy, mix.noise_scaled, with_mode(Mode::acoustic_only));
  const auto m = enhance(mix.noisy, mix.noise_scaled, with_mode(Mode::modmask_only));
  CHECK(enhance(mix.noisy, mix.noise_scaled, one).samples == a.samples);
  CHECK(enhance(mix.noisy, mix.noise_scaled, zero).samples == m.samples);
}

TEST_CASE("enhance: length, silence and determinism in every mode") {
  const auto mix = testing::fixture_mix(1, 0.0);
  const Waveform silence{std::vector<double>(mix.noisy.size(), 0.0), 16000.0};
  for (Mode mode : {Mode::fusion, Mode::acoustic_only, Mode::modmask_only, Mode::modssub_only}) {
    for (NoisePsdMode nm : {NoisePsdMode::oracle, NoisePsdMode::blind}) {
      auto c = with_mode(mode);
      c.noise_psd_mode = nm;
      INFO(to_string(mode) << " / " << to_string(nm));
      const auto y = enhance(mix.noisy, mix.noise_scaled, c);
      CHECK(y.size() == mix.noisy.size());
      CHECK(all_finite(y));
      CHECK(enhance(mix.noisy, mix.noise_scaled, c).samples == y.samples);
      const auto s = enhance(silence, silence, c);
      CHECK(s.size() == silence.size());
      for (double v : s.samples) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("enhance: odd lengths are preserved") {
  for (std::size_t len : {5000u, 5001u, 16000u, 16129u}) {
    const Waveform x{testing::random_signal(len, len, 0.1), 16000.0};
    const Waveform n{testing::random_signal(len, len + 1, 0.05), 16000.0};
    CHECK(enhance(x, n, EnhancementConfig{}).size() == len);
  }
}

TEST_CASE("enhance: fuzz over validated configurations") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto mix = testing::fixture_mix(2, 5.0);
  for (int trial = 0; trial < 12; ++trial) {
    EnhancementConfig c;
    c.stsa.alpha_high = 0.6 * u(rng);
    c.stsa.beta_low = 0.1 + 0.5 * u(rng);
    c.stsa.beta_high = c.stsa.beta_low + (1.5 - c.stsa.beta_low) * u(rng);
    c.stsa.mu_max = 1.0 + 3.0 * u(rng);
    c.modmask.eta_th_db = -20.0 + 20.0 * u(rng);
    c.modmask.mc_hz = 1.0 + 20.0 * u(rng);
    c.fusion.scope = trial % 2 ? fusion::SnrScope::per_bin : fusion::SnrScope::per_frame;
    c.fusion.continuity =
        trial % 3 ? fusion::ContinuityMode::continuous : fusion::ContinuityMode::paper_literal;
    c.noise_psd_mode = trial % 4 ? NoisePsdMode::oracle : NoisePsdMode::blind;
    REQUIRE_NOTHROW(validate(c));
    const auto r = enhance_detailed(mix.noisy, mix.noise_scaled, c);
    CHECK(all_finite(r.waveform));
    for (double v : r.output_mag.data()) CHECK((std::isfinite(v) && v >= 0.0));
  }
}

TEST_CASE("enhance: noise reference requirements") {
  const auto mix = testing::fixture_mix(3, 5.0);
  CHECK_THROWS_AS(enhance(mix.noisy, std::nullopt, EnhancementConfig{}), ConfigError);
  Waveform short_ref = mix.noise_scaled;
  short_ref.samples.resize(1000);
  CHECK_THROWS_AS(enhance(mix.noisy, short_ref, EnhancementConfig{}), ShapeError);
  auto blind = EnhancementConfig{};
  blind.noise_psd_mode = NoisePsdMode::blind;
  CHECK(enhance(mix.noisy, std::nullopt, blind).size() == mix.noisy.size());
}

TEST_CASE("enhance_detailed exposes the intermediate magnitudes") {
  const auto mix = testing::fixture_mix(4, 5.0);
  const auto r = enhance_detailed(mix.noisy, mix.noise_scaled, EnhancementConfig{});
  CHECK(r.noisy_mag.same_shape(r.acoustic_mag));
  CHECK(r.noisy_mag.same_shape(r.modulation_mag));
  CHECK(r.noisy_mag.same_shape(r.output_mag));
  CHECK(r.retained_fraction > 0.0);
  CHECK(r.clamp_rate >= 0.0);
  const auto a = enhance_detailed(mix.noisy, mix.noise_scaled, with_mode(Mode::acoustic_only));
  CHECK(a.modulation_mag.empty());
}
