#pragma once

#include <cstdint>
#include <vector>

#include "gapfill/dsp/stft.hpp"

namespace gapfill {

// Half-open masked sample range [start, end). Mask conventions everywhere:
// 1 = masked / invalid, 0 = valid.
struct MaskSpec {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > start ? end - start : 0; }

  // Masks must lie strictly inside the clip so both edges keep context.
  void validate(std::size_t clip_length) const;
};

// Per-sample mask, 1 inside [start, end).
std::vector<std::uint8_t> sample_mask(const MaskSpec& m,
                                      std::size_t clip_length);

// Per-frame mask on the given analysis grid: a frame is masked iff any
// sample its window touches is masked. Frame t's window covers original
// samples [t*hop - pad, t*hop - pad + window_width).
std::vector<std::uint8_t> frame_mask(const MaskSpec& m,
                                     std::size_t clip_length,
                                     const dsp::StftParams& p);

// Zeroes the masked samples (masked content is unknown by definition).
dsp::AudioClip zero_masked(const dsp::AudioClip& clip, const MaskSpec& m);

}  // namespace gapfill
