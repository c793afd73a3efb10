#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpdtrack::detail {

/// In-place iterative radix-2 FFT. Length must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_pow2: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Frequency of the largest zero-padded FFT magnitude within [lo, hi].
/// Used to seed nonlinear fits; resolution is f_s / padded_length.
inline double fft_peak_frequency(std::span<const double> samples, double f_s,
                                 double lo, double hi) {
  if (samples.empty()) throw std::invalid_argument("fft_peak_frequency: empty input");
  if (!(lo < hi) || lo < 0.0 || hi > f_s / 2.0)
    throw std::invalid_argument("fft_peak_frequency: bad search range");
  const std::size_t nfft = std::bit_ceil(samples.size());
  std::vector<std::complex<double>> buf(nfft, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = samples[i];
  fft_pow2(buf);
  const double df = f_s / static_cast<double>(nfft);
  auto k_lo = static_cast<std::size_t>(std::ceil(lo / df));
  auto k_hi = static_cast<std::size_t>(std::floor(hi / df));
  if (k_lo < 1) k_lo = 1;
  if (k_hi > nfft / 2) k_hi = nfft / 2;
  if (k_lo > k_hi) throw std::invalid_argument("fft_peak_frequency: empty bin range");
  std::size_t best = k_lo;
  double best_mag = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double m = std::norm(buf[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return static_cast<double>(best) * df;
}

/// Un-normalized DFT coefficient sum z_n exp(-i 2 pi m n / n_total) over one
/// block, via the Goertzel recurrence. Cheaper than a full FFT when only a
/// few bins are needed.
inline std::complex<double> goertzel_bin(std::span<const double> z, std::size_t m,
                                         std::size_t n_total) {
  const double w = 2.0 * std::numbers::pi * static_cast<double>(m) /
                   static_cast<double>(n_total);
  const double coeff = 2.0 * std::cos(w);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (const double x : z) {
    s0 = x + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  // X(m) = e^{iw} s_{N-1} - s_{N-2}, exact for integer bins m of n_total.
  return {s1 * std::cos(w) - s2, s1 * std::sin(w)};
}

}  // namespace fpdtrack::detail
