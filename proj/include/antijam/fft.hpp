#pragma once

#include <cstddef>
#include <vector>

#include "antijam/common.hpp"

namespace antijam {

/// In-place radix-2 decimation-in-time FFT, forward convention
/// X[k] = sum_n x[n] e^{-j 2 pi k n / N}.  N must be a power of two.
inline void fft_pow2(std::vector<cxd>& a) {
  const std::size_t n = a.size();
  if (n < 2) return;
  if ((n & (n - 1)) != 0) throw ConfigError("fft_pow2: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const cxd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cxd u = a[i + k];
        const cxd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace antijam
