#include "divprog/fft.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace divprog {

void fft_pow2(std::vector<Complex>& data, int sign) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  // Twiddles evaluated directly at the finest level; coarser levels stride it.
  std::vector<Complex> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = data[i + k];
        const Complex v = data[i + k + half] * twiddle[k * stride];
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

std::vector<Complex> chirp_dft(const std::vector<Complex>& input, int sign) {
  const std::size_t n = input.size();
  if (n == 0) return {};
  // nk = (n^2 + k^2 - (k-n)^2) / 2; chirp c_m = exp(sign * i pi m^2 / N) with
  // m^2 reduced mod 2N so the angle stays exact in integers.
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  std::vector<Complex> chirp(n);
  for (std::size_t m = 0; m < n; ++m) {
    const std::uint64_t sq = (static_cast<std::uint64_t>(m) * m) % two_n;
    const double angle = sign * std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
    chirp[m] = {std::cos(angle), std::sin(angle)};
  }
  std::size_t size = 1;
  while (size < 2 * n - 1) size <<= 1;
  std::vector<Complex> a(size, 0.0);
  std::vector<Complex> b(size, 0.0);
  for (std::size_t m = 0; m < n; ++m) a[m] = input[m] * chirp[m];
  b[0] = std::conj(chirp[0]);
  for (std::size_t m = 1; m < n; ++m) b[m] = b[size - m] = std::conj(chirp[m]);
  fft_pow2(a, -1);
  fft_pow2(b, -1);
  for (std::size_t i = 0; i < size; ++i) a[i] *= b[i];
  fft_pow2(a, +1);
  std::vector<Complex> out(n);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

}  // namespace divprog
