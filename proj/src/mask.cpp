#include "gapfill/mask.hpp"

#include <stdexcept>

namespace gapfill {

void MaskSpec::validate(std::size_t clip_length) const {
  if (end <= start)
    throw std::invalid_argument("MaskSpec: end must exceed start");
  if (start < 1 || end > clip_length - 1 || clip_length < 3)
    throw std::invalid_argument(
        "MaskSpec: mask must lie strictly inside the clip");
}

std::vector<std::uint8_t> sample_mask(const MaskSpec& m,
                                      std::size_t clip_length) {
  m.validate(clip_length);
  std::vector<std::uint8_t> mask(clip_length, 0);
  for (std::size_t i = m.start; i < m.end; ++i) mask[i] = 1;
  return mask;
}

std::vector<std::uint8_t> frame_mask(const MaskSpec& m,
                                     std::size_t clip_length,
                                     const dsp::StftParams& p) {
  m.validate(clip_length);
  const std::size_t frames = dsp::frame_count(clip_length, p);
  std::vector<std::uint8_t> mask(frames, 0);
  const long pad = static_cast<long>(p.pad());
  for (std::size_t t = 0; t < frames; ++t) {
    const long lo = static_cast<long>(t * p.hop) - pad;
    const long hi = lo + static_cast<long>(p.window_width);
    const bool overlaps =
        lo < static_cast<long>(m.end) && hi > static_cast<long>(m.start);
    mask[t] = overlaps ? 1 : 0;
  }
  return mask;
}

dsp::AudioClip zero_masked(const dsp::AudioClip& clip, const MaskSpec& m) {
  m.validate(clip.samples.size());
  dsp::AudioClip out = clip;
  for (std::size_t i = m.start; i < m.end; ++i) out.samples[i] = 0.0;
  return out;
}

}  // namespace gapfill
