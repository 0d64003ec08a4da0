#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sefusion/common.hpp"
#include "sefusion/dsp.hpp"
#include "sefusion/fusion.hpp"
#include "sefusion/modmask.hpp"
#include "sefusion/stsa.hpp"

namespace sefusion::pipeline {

enum class Mode { fusion, acoustic_only, modmask_only, modssub_only };
enum class NoisePsdMode { oracle, blind };

const char* to_string(Mode m);
const char* to_string(NoisePsdMode m);
Mode mode_from_string(const std::string& s);
NoisePsdMode noise_psd_mode_from_string(const std::string& s);

struct EnhancementConfig {
  AnalysisConfig acoustic = acoustic_default();
  AnalysisConfig modulation = modulation_default();
  stsa::StsaParams stsa{};
  stsa::BlindTrackerParams blind_tracker{};
  modmask::ModMaskParams modmask{};
  fusion::FusionConfig fusion{};
  Mode mode = Mode::fusion;
  NoisePsdMode noise_psd_mode = NoisePsdMode::oracle;
};

/// Cross-module checks for a signal at `sample_rate_hz`: each section's own
/// validation, a 16-frame modulation window, and the modulation cutoff below
/// the modulation Nyquist frequency. Throws ConfigError.
void validate(const EnhancementConfig& cfg, double sample_rate_hz = 16000.0);

/// Every field is written; `from_json` accepts any subset and rejects
/// unknown keys.
nlohmann::json to_json(const EnhancementConfig& cfg);
EnhancementConfig from_json(const nlohmann::json& j);
EnhancementConfig load_config(const std::filesystem::path& path);

struct EnhanceResult {
  Waveform waveform;
  // [frames x bins] magnitudes for inspection; paths not run stay empty.
  Matrix<double> noisy_mag;
  Matrix<double> acoustic_mag;
  Matrix<double> modulation_mag;
  Matrix<double> output_mag;
  double clamp_rate = 0.0;
  double retained_fraction = 0.0;
};

/// Enhances one utterance. `noise_ref` must be given (same length and rate
/// as `noisy`) in oracle noise mode and is ignored in blind mode.
EnhanceResult enhance_detailed(const Waveform& noisy, const std::optional<Waveform>& noise_ref,
                               const EnhancementConfig& cfg);
inline Waveform enhance(const Waveform& noisy, const std::optional<Waveform>& noise_ref,
                        const EnhancementConfig& cfg) {
  return enhance_detailed(noisy, noise_ref, cfg).waveform;
}

}  // namespace sefusion::pipeline
