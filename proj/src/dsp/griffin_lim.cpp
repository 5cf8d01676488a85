#include "gapfill/dsp/griffin_lim.hpp"

#include <cmath>
#include <stdexcept>

#include "gapfill/util/rng.hpp"

namespace gapfill::dsp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kTinyMag = 1e-300;

std::complex<double> unit_phase(std::complex<double> c) {
  const double m = std::abs(c);
  return m > kTinyMag ? c / m : std::complex<double>(1.0, 0.0);
}

}  // namespace

GriffinLimResult griffin_lim(const Spectrogram& target,
                             const GriffinLimOptions& opts) {
  if (target.kind != SpecKind::magnitude)
    throw std::invalid_argument(
        "griffin_lim: target must be a magnitude spectrogram");
  const std::size_t bins = target.bins;
  const std::size_t frames = target.frames;
  const std::size_t n = frames * bins;
  if (target.rdata.size() != n)
    throw std::invalid_argument("griffin_lim: inconsistent target size");

  if (opts.seed_mode == PhaseSeed::keep_known) {
    if (!opts.known || !opts.frame_mask)
      throw std::invalid_argument(
          "griffin_lim: keep_known needs a known spectrogram and frame mask");
    if (opts.known->kind != SpecKind::complex_bins ||
        opts.known->bins != bins || opts.known->frames != frames ||
        !(opts.known->params == target.params))
      throw std::invalid_argument(
          "griffin_lim: known spectrogram grid mismatch");
    if (opts.frame_mask->size() != frames)
      throw std::invalid_argument("griffin_lim: frame mask size mismatch");
  }

  // Seed phases.
  std::vector<std::complex<double>> state(n);
  switch (opts.seed_mode) {
    case PhaseSeed::zero:
      for (std::size_t i = 0; i < n; ++i) state[i] = {target.rdata[i], 0.0};
      break;
    case PhaseSeed::random_uniform: {
      Rng rng(opts.seed);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, kTwoPi);
        state[i] = target.rdata[i] *
                   std::complex<double>(std::cos(a), std::sin(a));
      }
      break;
    }
    case PhaseSeed::keep_known:
      for (std::size_t t = 0; t < frames; ++t) {
        const bool unknown = (*opts.frame_mask)[t] != 0;
        for (std::size_t b = 0; b < bins; ++b) {
          const std::size_t i = t * bins + b;
          state[i] = unknown
                         ? std::complex<double>(target.rdata[i], 0.0)
                         : target.rdata[i] * unit_phase(opts.known->cdata[i]);
        }
      }
      break;
  }

  // All projections run in the padded domain so synthesis stays the exact
  // least-squares inverse of analysis; that is what makes the consistency
  // error non-increasing.
  const StftParams& p = target.params;
  const std::size_t padded_len = target.source_length + 2 * p.pad();

  auto weighted_error = [&](const std::vector<std::complex<double>>& cur) {
    double acc = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t i = t * bins + b;
        const double d = std::abs(cur[i]) - target.rdata[i];
        const double wgt = (b == 0 || b == bins - 1) ? 1.0 : 2.0;
        acc += wgt * d * d;
      }
    }
    return std::sqrt(acc);
  };

  GriffinLimResult result;
  result.consistency_errors.reserve(opts.iterations + 1);

  std::vector<double> x = synthesize_frames(state, frames, p, padded_len);
  for (std::size_t it = 0;; ++it) {
    std::size_t got = 0;
    auto cur = analyze_frames(x, p, &got);
    result.consistency_errors.push_back(weighted_error(cur));
    if (it == opts.iterations) break;

    for (std::size_t i = 0; i < n; ++i)
      cur[i] = target.rdata[i] * unit_phase(cur[i]);
    if (opts.seed_mode == PhaseSeed::keep_known) {
      for (std::size_t t = 0; t < frames; ++t) {
        if ((*opts.frame_mask)[t] != 0) continue;
        for (std::size_t b = 0; b < bins; ++b) {
          const std::size_t i = t * bins + b;
          cur[i] = target.rdata[i] * unit_phase(opts.known->cdata[i]);
        }
      }
    }
    x = synthesize_frames(cur, frames, p, padded_len);
  }

  result.clip.sample_rate = target.sample_rate;
  result.clip.samples.assign(
      x.begin() + static_cast<long>(p.pad()),
      x.begin() + static_cast<long>(p.pad() + target.source_length));
  return result;
}

}  // namespace gapfill::dsp
