// Iterative radix-2 complex FFT, power-of-two sizes.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "waveprobe/common.hpp"

namespace waveprobe::dsp {

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  require(n > 0 && (n & (n - 1)) == 0, errc::config, "fft: size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

/// FFT of a real frame zero-padded to `fft_size`; returns the full complex spectrum.
inline std::vector<std::complex<double>> fft_real(const std::vector<double>& frame, std::size_t fft_size) {
  std::vector<std::complex<double>> a(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size() && i < fft_size; ++i) a[i] = {frame[i], 0.0};
  fft_inplace(a);
  return a;
}

}  // namespace waveprobe::dsp
