#include "gapfill/dsp/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace gapfill::dsp {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Per-size twiddle table, e^{-2*pi*i*j/n} for j in [0, n/2). Tables are
// immutable once built, so handing out a shared_ptr is safe across threads.
std::shared_ptr<const std::vector<std::complex<double>>> twiddles(
    std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t,
                  std::shared_ptr<const std::vector<std::complex<double>>>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<std::vector<std::complex<double>>>(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    double ang = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    (*table)[j] = {std::cos(ang), std::sin(ang)};
  }
  cache.emplace(n, table);
  return cache[n];
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_power_of_two(n))
    throw std::invalid_argument("fft_inplace: size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  auto table = twiddles(n);
  const auto& tw = *table;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> w = tw[j * step];
        if (inverse) w = std::conj(w);
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

std::vector<std::complex<double>> rfft(const double* x, std::size_t n) {
  if (!is_power_of_two(n) || n < 2)
    throw std::invalid_argument("rfft: size must be a power of two >= 2");
  const std::size_t m = n / 2;

  // Pack even samples into the real lane, odd into the imaginary lane,
  // run a half-size complex transform, then untangle.
  std::vector<std::complex<double>> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = {x[2 * i], x[2 * i + 1]};
  fft_inplace(z, false);

  auto table = twiddles(n);
  const auto& tw = *table;  // tw[k] = e^{-2*pi*i*k/n}, k < n/2 = m

  std::vector<std::complex<double>> out(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const std::complex<double> zk = z[k % m];
    const std::complex<double> zmk = std::conj(z[(m - k) % m]);
    const std::complex<double> even = 0.5 * (zk + zmk);
    const std::complex<double> odd =
        std::complex<double>(0.0, -0.5) * (zk - zmk);
    const std::complex<double> w =
        (k == m) ? std::complex<double>(-1.0, 0.0) : tw[k];
    out[k] = even + w * odd;
  }
  return out;
}

std::vector<double> irfft(const std::complex<double>* bins, std::size_t n) {
  if (!is_power_of_two(n) || n < 2)
    throw std::invalid_argument("irfft: size must be a power of two >= 2");
  const std::size_t m = n / 2;

  auto table = twiddles(n);
  const auto& tw = *table;

  std::vector<std::complex<double>> z(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::complex<double> a = bins[k];
    const std::complex<double> b = std::conj(bins[m - k]);
    const std::complex<double> even = 0.5 * (a + b);
    const std::complex<double> odd = 0.5 * (a - b) * std::conj(tw[k]);
    z[k] = even + std::complex<double>(0.0, 1.0) * odd;
  }
  fft_inplace(z, true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < m; ++i) {
    out[2 * i] = z[i].real();
    out[2 * i + 1] = z[i].imag();
  }
  return out;
}

}  // namespace gapfill::dsp
