#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "gapfill/dsp/audio.hpp"

namespace gapfill::dsp {

enum class Window { hann_periodic };

// Periodic Hann taper, w[n] = 0.5 - 0.5*cos(2*pi*n/width).
std::vector<double> hann_window(std::size_t width);

struct StftParams {
  std::size_t window_width = 512;
  std::size_t hop = 128;
  std::size_t fft_size = 512;  // power of two >= window_width
  Window window = Window::hann_periodic;

  // fft_size == 0 picks the next power of two >= window_width. Throws
  // std::invalid_argument for unusable combinations, including any hop for
  // which some sample residue class gets (near-)zero squared-window
  // overlap-add coverage - those params have no exact inverse.
  static StftParams make(std::size_t window_width, std::size_t hop,
                         std::size_t fft_size = 0);

  std::size_t bins() const { return fft_size / 2 + 1; }
  std::size_t pad() const { return window_width / 2; }
  bool operator==(const StftParams&) const = default;
};

enum class SpecKind { complex_bins, magnitude, log_magnitude };

// Frame-major storage: entry (frame t, bin b) lives at t*bins + b.
struct Spectrogram {
  StftParams params;
  SpecKind kind = SpecKind::complex_bins;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::size_t source_length = 0;  // samples before reflection padding
  int sample_rate = 0;
  std::vector<std::complex<double>> cdata;  // complex_bins
  std::vector<double> rdata;                // magnitude / log_magnitude

  std::size_t at(std::size_t t, std::size_t b) const { return t * bins + b; }
};

// Number of analysis frames for a clip of `length` samples: the signal is
// reflection-padded by window/2 on both ends, frames start every `hop`.
std::size_t frame_count(std::size_t length, const StftParams& p);

Spectrogram stft(const AudioClip& clip, const StftParams& p);

// Exact least-squares inverse (overlap-add weighted by the analysis window,
// normalized by the accumulated squared-window sum). Requires complex_bins.
AudioClip istft(const Spectrogram& spec);

Spectrogram magnitude(const Spectrogram& spec);     // complex -> magnitude
Spectrogram log_compress(const Spectrogram& spec);  // m -> log(1 + m)
Spectrogram log_expand(const Spectrogram& spec);    // x -> exp(x) - 1

// Padded-domain frame operators. griffin_lim iterates on these directly so
// the synthesis step stays the exact least-squares inverse of the analysis
// step (reflection padding is applied once, outside the loop).
std::vector<double> reflect_pad(const std::vector<double>& x,
                                std::size_t pad);
std::vector<std::complex<double>> analyze_frames(
    const std::vector<double>& padded, const StftParams& p,
    std::size_t* frames_out);
std::vector<double> synthesize_frames(
    const std::vector<std::complex<double>>& data, std::size_t frames,
    const StftParams& p, std::size_t padded_len);

}  // namespace gapfill::dsp
