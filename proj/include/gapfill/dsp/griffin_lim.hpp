#pragma once

#include <cstdint>
#include <vector>

#include "gapfill/dsp/stft.hpp"

namespace gapfill::dsp {

enum class PhaseSeed { zero, random_uniform, keep_known };

struct GriffinLimOptions {
  std::size_t iterations = 60;
  PhaseSeed seed_mode = PhaseSeed::zero;
  std::uint64_t seed = 0;  // used by random_uniform

  // keep_known: phases are taken from `known` (a complex spectrogram on the
  // same grid) and re-imposed after every projection on frames whose
  // frame_mask entry is 0; frames marked 1 evolve freely (zero-phase start).
  const Spectrogram* known = nullptr;
  const std::vector<std::uint8_t>* frame_mask = nullptr;
};

struct GriffinLimResult {
  AudioClip clip;
  // errors[i] = half-spectrum-weighted Frobenius distance between the
  // magnitude of the i-th iterate's frames and the target magnitude;
  // size is iterations + 1 (index 0 is the seeded estimate).
  std::vector<double> consistency_errors;
};

// Alternating projection phase recovery from a magnitude spectrogram.
GriffinLimResult griffin_lim(const Spectrogram& target_magnitude,
                             const GriffinLimOptions& opts);

}  // namespace gapfill::dsp
