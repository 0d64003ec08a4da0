#pragma once

#include <cstdint>

#include "sefusion/dsp.hpp"

namespace sefusion::synth {

/// Deterministic generator state with platform-independent sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Speech-like test utterance: voiced syllables (glottal pulse train through
/// three parallel formant resonators) with occasional fricatives and pauses, giving a
/// 3-6 Hz envelope modulation and a falling spectral tilt. Peak 0.5.
Waveform speech_like(std::uint64_t seed, double duration_s = 2.5, double fs = 16000.0);

Waveform white_noise(std::uint64_t seed, double duration_s, double fs = 16000.0);
/// 1/f noise (Kellet's pinking filter on white noise).
Waveform pink_noise(std::uint64_t seed, double duration_s, double fs = 16000.0);
/// Sum of six independent speech-like talkers.
Waveform babble_noise(std::uint64_t seed, double duration_s, double fs = 16000.0);

}  // namespace sefusion::synth
