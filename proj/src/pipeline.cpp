#include "sefusion/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

namespace sefusion::pipeline {

using nlohmann::json;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::fusion: return "fusion";
    case Mode::acoustic_only: return "acoustic_only";
    case Mode::modmask_only: return "modmask_only";
    case Mode::modssub_only: return "modssub_only";
  }
  return "?";
}

const char* to_string(NoisePsdMode m) { return m == NoisePsdMode::oracle ? "oracle" : "blind"; }

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::fusion, Mode::acoustic_only, Mode::modmask_only, Mode::modssub_only}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

NoisePsdMode noise_psd_mode_from_string(const std::string& s) {
  if (s == "oracle") return NoisePsdMode::oracle;
  if (s == "blind") return NoisePsdMode::blind;
  throw ConfigError("unknown noise_psd_mode '" + s + "'");
}

void validate(const EnhancementConfig& cfg, double sample_rate_hz) {
  validate(cfg.acoustic);
  validate(cfg.modulation);
  stsa::validate(cfg.stsa);
  fusion::validate(cfg.fusion);
  if (cfg.modulation.window_len != 16) {
    throw ConfigError("modulation.window_len must be 16 acoustic frames, got " +
                      std::to_string(cfg.modulation.window_len));
  }
  const double frame_rate = sample_rate_hz / static_cast<double>(cfg.acoustic.hop);
  modmask::validate(cfg.modmask, frame_rate);
  const double mod_nyquist = frame_rate / 2.0;
  if (!(cfg.modmask.mc_hz < mod_nyquist)) {
    throw ConfigError("modmask.mc_hz must lie below the modulation Nyquist frequency (" +
                      std::to_string(mod_nyquist) + " Hz)");
  }
  const auto& bt = cfg.blind_tracker;
  if (!(bt.prior_speech_presence > 0.0 && bt.prior_speech_presence < 1.0)) {
    throw ConfigError("blind_tracker.prior_speech_presence must lie in (0, 1)");
  }
  if (!(bt.psd_smoothing >= 0.0 && bt.psd_smoothing < 1.0) ||
      !(bt.spp_smoothing >= 0.0 && bt.spp_smoothing < 1.0)) {
    throw ConfigError("blind_tracker smoothing constants must lie in [0, 1)");
  }
}

// --- JSON ---------------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

void read(const json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw ConfigError(path_of(where, key) + ": expected a number");
  out = j[key].get<double>();
}
void read(const json& j, const char* key, std::size_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_unsigned()) {
    throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
  }
  out = j[key].get<std::size_t>();
}
void read(const json& j, const char* key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) throw ConfigError(path_of(where, key) + ": expected true or false");
  out = j[key].get<bool>();
}
std::optional<std::string> read_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_string()) throw ConfigError(path_of(where, key) + ": expected a string");
  return j[key].get<std::string>();
}

json analysis_json(const AnalysisConfig& a) {
  return {{"window_len", a.window_len}, {"hop", a.hop}, {"fft_size", a.fft_size},
          {"window", to_string(a.window)}};
}
void analysis_from(const json& j, AnalysisConfig& a, const std::string& where) {
  check_keys(j, where, {"window_len", "hop", "fft_size", "window"});
  read(j, "window_len", a.window_len, where);
  read(j, "hop", a.hop, where);
  read(j, "fft_size", a.fft_size, where);
  if (auto s = read_string(j, "window", where)) a.window = window_kind_from_string(*s);
}

}  // namespace

json to_json(const EnhancementConfig& cfg) {
  const auto& s = cfg.stsa;
  const auto& b = cfg.blind_tracker;
  const auto& m = cfg.modmask;
  const auto& f = cfg.fusion;
  return {
      {"acoustic", analysis_json(cfg.acoustic)},
      {"modulation", analysis_json(cfg.modulation)},
      {"stsa",
       {{"alpha_low", s.alpha_low},
        {"alpha_high", s.alpha_high},
        {"beta_low", s.beta_low},
        {"beta_high", s.beta_high},
        {"mu_min", s.mu_min},
        {"mu_max", s.mu_max},
        {"tonotopic_q", s.tonotopic_q},
        {"tonotopic_l", s.tonotopic_l},
        {"dd_smoothing", s.dd_smoothing},
        {"zeta_floor", s.zeta_floor},
        {"zeta_norm_low_db", s.zeta_norm_low_db},
        {"zeta_norm_high_db", s.zeta_norm_high_db},
        {"use_paper_prefactor", s.use_paper_prefactor},
        {"kummer",
         {{"series_term_cap", s.kummer.series_term_cap},
          {"series_tolerance", s.kummer.series_tolerance},
          {"asymptotic_switch_threshold", s.kummer.asymptotic_switch_threshold},
          {"asymptotic_term_cap", s.kummer.asymptotic_term_cap}}}}},
      {"blind_tracker",
       {{"prior_speech_presence", b.prior_speech_presence},
        {"xi_h1_db", b.xi_h1_db},
        {"psd_smoothing", b.psd_smoothing},
        {"spp_smoothing", b.spp_smoothing},
        {"stuck_threshold", b.stuck_threshold},
        {"stuck_frames", b.stuck_frames},
        {"init_frames", b.init_frames}}},
      {"modmask",
       {{"eta_th_db", m.eta_th_db},
        {"mc_hz", m.mc_hz},
        {"keep_dc", m.keep_dc},
        {"subtraction_floor", m.subtraction_floor},
        {"noise_frames_init", m.noise_frames_init},
        {"vad_margin_db", m.vad_margin_db}}},
      {"fusion",
       {{"low_break_db", f.low_break_db},
        {"high_break_db", f.high_break_db},
        {"weight_floor", f.weight_floor},
        {"weight_ceil", f.weight_ceil},
        {"continuity_mode", fusion::to_string(f.continuity)},
        {"snr_scope", fusion::to_string(f.scope)}}},
      {"mode", to_string(cfg.mode)},
      {"noise_psd_mode", to_string(cfg.noise_psd_mode)},
  };
}

EnhancementConfig from_json(const json& j) {
  EnhancementConfig cfg;
  check_keys(j, "config", {"acoustic", "modulation", "stsa", "blind_tracker", "modmask", "fusion",
                           "mode", "noise_psd_mode"});
  if (j.contains("acoustic")) analysis_from(j["acoustic"], cfg.acoustic, "acoustic");
  if (j.contains("modulation")) analysis_from(j["modulation"], cfg.modulation, "modulation");
  if (j.contains("stsa")) {
    const json& s = j["stsa"];
    const std::string w = "stsa";
    check_keys(s, w, {"alpha_low", "alpha_high", "beta_low", "beta_high", "mu_min", "mu_max",
                      "tonotopic_q", "tonotopic_l", "dd_smoothing", "zeta_floor", "zeta_norm_low_db",
                      "zeta_norm_high_db", "use_paper_prefactor", "kummer"});
    auto& p = cfg.stsa;
    read(s, "alpha_low", p.alpha_low, w);
    read(s, "alpha_high", p.alpha_high, w);
    read(s, "beta_low", p.beta_low, w);
    read(s, "beta_high", p.beta_high, w);
    read(s, "mu_min", p.mu_min, w);
    read(s, "mu_max", p.mu_max, w);
    read(s, "tonotopic_q", p.tonotopic_q, w);
    read(s, "tonotopic_l", p.tonotopic_l, w);
    read(s, "dd_smoothing", p.dd_smoothing, w);
    read(s, "zeta_floor", p.zeta_floor, w);
    read(s, "zeta_norm_low_db", p.zeta_norm_low_db, w);
    read(s, "zeta_norm_high_db", p.zeta_norm_high_db, w);
    read(s, "use_paper_prefactor", p.use_paper_prefactor, w);
    if (s.contains("kummer")) {
      const json& k = s["kummer"];
      const std::string wk = "stsa.kummer";
      check_keys(k, wk, {"series_term_cap", "series_tolerance", "asymptotic_switch_threshold",
                         "asymptotic_term_cap"});
      read(k, "series_term_cap", p.kummer.series_term_cap, wk);
      read(k, "series_tolerance", p.kummer.series_tolerance, wk);
      read(k, "asymptotic_switch_threshold", p.kummer.asymptotic_switch_threshold, wk);
      read(k, "asymptotic_term_cap", p.kummer.asymptotic_term_cap, wk);
    }
  }
  if (j.contains("blind_tracker")) {
    const json& b = j["blind_tracker"];
    const std::string w = "blind_tracker";
    check_keys(b, w, {"prior_speech_presence", "xi_h1_db", "psd_smoothing", "spp_smoothing",
                      "stuck_threshold", "stuck_frames", "init_frames"});
    auto& p = cfg.blind_tracker;
    read(b, "prior_speech_presence", p.prior_speech_presence, w);
    read(b, "xi_h1_db", p.xi_h1_db, w);
    read(b, "psd_smoothing", p.psd_smoothing, w);
    read(b, "spp_smoothing", p.spp_smoothing, w);
    read(b, "stuck_threshold", p.stuck_threshold, w);
    read(b, "stuck_frames", p.stuck_frames, w);
    read(b, "init_frames", p.init_frames, w);
  }
  if (j.contains("modmask")) {
    const json& m = j["modmask"];
    const std::string w = "modmask";
    check_keys(m, w, {"eta_th_db", "mc_hz", "keep_dc", "subtraction_floor", "noise_frames_init",
                      "vad_margin_db"});
    auto& p = cfg.modmask;
    read(m, "eta_th_db", p.eta_th_db, w);
    read(m, "mc_hz", p.mc_hz, w);
    read(m, "keep_dc", p.keep_dc, w);
    read(m, "subtraction_floor", p.subtraction_floor, w);
    read(m, "noise_frames_init", p.noise_frames_init, w);
    read(m, "vad_margin_db", p.vad_margin_db, w);
  }
  if (j.contains("fusion")) {
    const json& f = j["fusion"];
    const std::string w = "fusion";
    check_keys(f, w, {"low_break_db", "high_break_db", "weight_floor", "weight_ceil",
                      "continuity_mode", "snr_scope"});
    auto& p = cfg.fusion;
    read(f, "low_break_db", p.low_break_db, w);
    read(f, "high_break_db", p.high_break_db, w);
    read(f, "weight_floor", p.weight_floor, w);
    read(f, "weight_ceil", p.weight_ceil, w);
    if (auto s = read_string(f, "continuity_mode", w)) p.continuity = fusion::continuity_from_string(*s);
    if (auto s = read_string(f, "snr_scope", w)) p.scope = fusion::scope_from_string(*s);
  }
  if (auto s = read_string(j, "mode", "")) cfg.mode = mode_from_string(*s);
  if (auto s = read_string(j, "noise_psd_mode", "")) {
    cfg.noise_psd_mode = noise_psd_mode_from_string(*s);
  }
  return cfg;
}

EnhancementConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

// --- enhancement ----------------------------------------------------------------

EnhanceResult enhance_detailed(const Waveform& noisy, const std::optional<Waveform>& noise_ref,
                               const EnhancementConfig& cfg) {
  validate(noisy);
  const double fs = noisy.sample_rate_hz;
  validate(cfg, fs);

  const Spectrogram spec = stft(noisy, cfg.acoustic);
  MagPhase mp = split_mag_phase(spec);
  const double frame_rate = fs / static_cast<double>(cfg.acoustic.hop);

  EnhanceResult r;
  r.noisy_mag = mp.magnitude;

  if (cfg.mode == Mode::modssub_only || cfg.mode == Mode::modmask_only) {
    const auto mod = cfg.mode == Mode::modssub_only
                         ? modmask::enhance_modulation_ssub(mp.magnitude, cfg.modmask,
                                                            cfg.modulation, frame_rate)
                         : modmask::enhance_modulation(mp.magnitude, cfg.modmask, cfg.modulation,
                                                       frame_rate);
    r.modulation_mag = mod.magnitude;
    r.output_mag = mod.magnitude;
    r.clamp_rate = mod.clamp_rate;
    r.retained_fraction = mod.retained_fraction;
  } else {
    Matrix<double> noise_psd;
    if (cfg.noise_psd_mode == NoisePsdMode::oracle) {
      if (!noise_ref) throw ConfigError("oracle noise_psd_mode requires a noise reference");
      validate(*noise_ref);
      if (noise_ref->size() != noisy.size() || noise_ref->sample_rate_hz != fs) {
        throw ShapeError("noise reference must match the noisy signal in length and rate (" +
                         std::to_string(noise_ref->size()) + " vs " + std::to_string(noisy.size()) +
                         " samples)");
      }
      const auto noise_mag = split_mag_phase(stft(*noise_ref, cfg.acoustic)).magnitude;
      noise_psd = stsa::oracle_noise_psd(stsa::power_of(noise_mag));
    } else {
      noise_psd = stsa::blind_noise_psd(stsa::power_of(mp.magnitude), cfg.blind_tracker);
    }
    const stsa::SnrTrack track = stsa::build_snr_track(mp.magnitude, noise_psd, fs, cfg.stsa);
    r.acoustic_mag = stsa::enhance_acoustic(mp.magnitude, track, fs, cfg.stsa);
    if (cfg.mode == Mode::acoustic_only) {
      r.output_mag = r.acoustic_mag;
    } else {
      const auto mod =
          modmask::enhance_modulation(mp.magnitude, cfg.modmask, cfg.modulation, frame_rate);
      r.modulation_mag = mod.magnitude;
      r.clamp_rate = mod.clamp_rate;
      r.retained_fraction = mod.retained_fraction;
      r.output_mag = fusion::fuse_with_gamma(r.acoustic_mag, r.modulation_mag, track.gamma, cfg.fusion);
    }
  }

  r.waveform = fusion::synthesize(r.output_mag, mp.phase, spec);
  if (r.waveform.size() != noisy.size()) {
    throw ShapeError("enhance: synthesized length " + std::to_string(r.waveform.size()) +
                     " differs from input length " + std::to_string(noisy.size()));
  }
  return r;
}

}  // namespace sefusion::pipeline
