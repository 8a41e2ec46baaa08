#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spikeosc::dsp {

using cplx = std::complex<double>;

std::size_t next_pow2(std::size_t n) noexcept;

// Forward transform X_k = sum_n x_n e^{-2 pi i k n / N}; the inverse is scaled by
// 1/N. Any length is accepted (Bluestein's algorithm for non-powers of two).
std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> ifft(std::span<const cplx> X);
std::vector<cplx> fft_real(std::span<const double> x);

/// Full linear convolution, length x.size() + h.size() - 1.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

}  // namespace spikeosc::dsp
