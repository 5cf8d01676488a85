#include "gapfill/dsp/stft.hpp"

#include <cmath>
#include <stdexcept>

#include "gapfill/dsp/fft.hpp"
#include "gapfill/util/errors.hpp"

namespace gapfill::dsp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kCoverageFloor = 1e-9;
}  // namespace

std::vector<double> hann_window(std::size_t width) {
  std::vector<double> w(width);
  for (std::size_t n = 0; n < width; ++n)
    w[n] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(n) /
                                static_cast<double>(width));
  return w;
}

StftParams StftParams::make(std::size_t window_width, std::size_t hop,
                            std::size_t fft_size) {
  if (window_width < 2)
    throw std::invalid_argument("StftParams: window_width must be >= 2");
  if (hop == 0 || hop > window_width)
    throw std::invalid_argument(
        "StftParams: hop must be in [1, window_width]");
  if (fft_size == 0) fft_size = next_power_of_two(window_width);
  if (!is_power_of_two(fft_size) || fft_size < window_width)
    throw std::invalid_argument(
        "StftParams: fft_size must be a power of two >= window_width");

  // Every residue class modulo hop must accumulate nonzero squared-window
  // mass, otherwise some samples are unrecoverable (e.g. hop == width with
  // a Hann window, whose endpoint is exactly zero).
  std::vector<double> w = hann_window(window_width);
  for (std::size_t r = 0; r < hop; ++r) {
    double s = 0.0;
    for (std::size_t n = r; n < window_width; n += hop) s += w[n] * w[n];
    if (s < kCoverageFloor)
      throw std::invalid_argument(
          "StftParams: window/hop pair leaves samples uncovered (no exact "
          "inverse)");
  }

  StftParams p;
  p.window_width = window_width;
  p.hop = hop;
  p.fft_size = fft_size;
  return p;
}

std::size_t frame_count(std::size_t length, const StftParams& p) {
  const std::size_t padded = length + 2 * p.pad();
  if (padded < p.window_width) return 0;
  return (padded - p.window_width) / p.hop + 1;
}

std::vector<double> reflect_pad(const std::vector<double>& x,
                                std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("reflect_pad: empty input");
  std::vector<double> out(n + 2 * pad);
  auto fold = [&](long i) -> std::size_t {
    if (n == 1) return 0;
    const long period = 2 * static_cast<long>(n) - 2;
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<long>(n)) i = period - i;
    return static_cast<std::size_t>(i);
  };
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = x[fold(static_cast<long>(i) - static_cast<long>(pad))];
  return out;
}

std::vector<std::complex<double>> analyze_frames(
    const std::vector<double>& padded, const StftParams& p,
    std::size_t* frames_out) {
  if (padded.size() < p.window_width)
    throw std::invalid_argument("analyze_frames: signal shorter than window");
  const std::size_t frames = (padded.size() - p.window_width) / p.hop + 1;
  const std::size_t bins = p.bins();
  const std::vector<double> w = hann_window(p.window_width);

  std::vector<std::complex<double>> out(frames * bins);
  std::vector<double> seg(p.fft_size, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = padded.data() + t * p.hop;
    for (std::size_t n = 0; n < p.window_width; ++n) seg[n] = src[n] * w[n];
    for (std::size_t n = p.window_width; n < p.fft_size; ++n) seg[n] = 0.0;
    auto spec = rfft(seg.data(), p.fft_size);
    for (std::size_t b = 0; b < bins; ++b) out[t * bins + b] = spec[b];
  }
  if (frames_out) *frames_out = frames;
  return out;
}

std::vector<double> synthesize_frames(
    const std::vector<std::complex<double>>& data, std::size_t frames,
    const StftParams& p, std::size_t padded_len) {
  const std::size_t bins = p.bins();
  if (data.size() != frames * bins)
    throw std::invalid_argument("synthesize_frames: bad data size");
  if (frames == 0 || (frames - 1) * p.hop + p.window_width > padded_len)
    throw std::invalid_argument("synthesize_frames: frames exceed length");

  const std::vector<double> w = hann_window(p.window_width);
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> den(padded_len, 0.0);
  std::vector<std::complex<double>> col(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < bins; ++b) col[b] = data[t * bins + b];
    auto seg = irfft(col.data(), p.fft_size);
    double* ya = acc.data() + t * p.hop;
    double* yd = den.data() + t * p.hop;
    for (std::size_t n = 0; n < p.window_width; ++n) {
      ya[n] += w[n] * seg[n];
      yd[n] += w[n] * w[n];
    }
  }
  for (std::size_t i = 0; i < padded_len; ++i)
    acc[i] = den[i] > kCoverageFloor ? acc[i] / den[i] : 0.0;
  return acc;
}

Spectrogram stft(const AudioClip& clip, const StftParams& p) {
  if (clip.samples.empty()) throw std::invalid_argument("stft: empty clip");
  Spectrogram spec;
  spec.params = p;
  spec.kind = SpecKind::complex_bins;
  spec.bins = p.bins();
  spec.source_length = clip.samples.size();
  spec.sample_rate = clip.sample_rate;
  auto padded = reflect_pad(clip.samples, p.pad());
  spec.cdata = analyze_frames(padded, p, &spec.frames);
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  if (spec.kind != SpecKind::complex_bins)
    throw std::invalid_argument("istft: spectrogram must hold complex bins");
  const std::size_t padded_len = spec.source_length + 2 * spec.params.pad();
  auto padded =
      synthesize_frames(spec.cdata, spec.frames, spec.params, padded_len);
  AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.samples.assign(padded.begin() + static_cast<long>(spec.params.pad()),
                      padded.begin() + static_cast<long>(spec.params.pad() +
                                                         spec.source_length));
  return clip;
}

Spectrogram magnitude(const Spectrogram& spec) {
  if (spec.kind != SpecKind::complex_bins)
    throw std::invalid_argument("magnitude: input must hold complex bins");
  Spectrogram out;
  out.params = spec.params;
  out.kind = SpecKind::magnitude;
  out.bins = spec.bins;
  out.frames = spec.frames;
  out.source_length = spec.source_length;
  out.sample_rate = spec.sample_rate;
  out.rdata.resize(spec.cdata.size());
  for (std::size_t i = 0; i < spec.cdata.size(); ++i)
    out.rdata[i] = std::abs(spec.cdata[i]);
  return out;
}

Spectrogram log_compress(const Spectrogram& spec) {
  if (spec.kind != SpecKind::magnitude)
    throw std::invalid_argument("log_compress: input must be magnitude");
  Spectrogram out = spec;
  out.kind = SpecKind::log_magnitude;
  for (auto& v : out.rdata) v = std::log1p(v);
  return out;
}

Spectrogram log_expand(const Spectrogram& spec) {
  if (spec.kind != SpecKind::log_magnitude)
    throw std::invalid_argument("log_expand: input must be log magnitude");
  Spectrogram out = spec;
  out.kind = SpecKind::magnitude;
  for (auto& v : out.rdata) {
    v = std::expm1(v);
    if (v < 0.0) v = 0.0;
  }
  return out;
}

}  // namespace gapfill::dsp
