#pragma once
// Radix-2 FFT and the chirp-z (Bluestein) reduction for arbitrary lengths.

#include <complex>
#include <vector>

namespace divprog {

using Complex = std::complex<double>;

// In-place transform of a power-of-two length vector.  sign = -1 computes
// sum_n x_n exp(-2 pi i nk / N); sign = +1 the positive exponent.  No scaling.
void fft_pow2(std::vector<Complex>& data, int sign);

// Same sums for any length N >= 1, via a power-of-two circular convolution.
std::vector<Complex> chirp_dft(const std::vector<Complex>& input, int sign);

}  // namespace divprog
