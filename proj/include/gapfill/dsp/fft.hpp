#pragma once

#include <complex>
#include <vector>

namespace gapfill::dsp {

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// In-place iterative radix-2 transform, n a power of two. The inverse
// includes the 1/n scale. Fixed butterfly order keeps results bit-stable.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Real-input forward transform via the half-size packing trick.
// Returns n/2 + 1 bins (DC..Nyquist); n must be a power of two >= 2.
std::vector<std::complex<double>> rfft(const double* x, std::size_t n);

// Inverse of rfft: consumes n/2 + 1 bins, emits n real samples. The implied
// negative-frequency half is the conjugate mirror.
std::vector<double> irfft(const std::complex<double>* bins, std::size_t n);

}  // namespace gapfill::dsp
