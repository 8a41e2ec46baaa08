#include "spikeosc/fft.hpp"

#include <cmath>
#include <numbers>

namespace spikeosc::dsp {

namespace {

void radix2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::size_t half = len / 2;
    // Twiddles computed directly rather than by recurrence to keep rounding error flat.
    std::vector<cplx> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      tw[k] = std::polar(1.0, ang * static_cast<double>(k));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void transform(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if ((n & (n - 1)) == 0) {
    radix2(a, inverse);
    return;
  }
  // Bluestein: re-express the DFT as a convolution with a chirp.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto k2 = static_cast<double>((static_cast<unsigned long long>(k) * k) % (2 * n));
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * k2 / static_cast<double>(n));
  }
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cplx> A(m), B(m);
  for (std::size_t k = 0; k < n; ++k) A[k] = a[k] * chirp[k];
  B[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) B[k] = B[m - k] = std::conj(chirp[k]);
  radix2(A, false);
  radix2(B, false);
  for (std::size_t i = 0; i < m; ++i) A[i] *= B[i];
  radix2(A, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = A[k] * inv_m * chirp[k];
}

}  // namespace

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cplx> fft(std::span<const cplx> x) {
  std::vector<cplx> a(x.begin(), x.end());
  transform(a, false);
  return a;
}

std::vector<cplx> ifft(std::span<const cplx> X) {
  std::vector<cplx> a(X.begin(), X.end());
  transform(a, true);
  const double inv = a.empty() ? 1.0 : 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= inv;
  return a;
}

std::vector<cplx> fft_real(std::span<const double> x) {
  std::vector<cplx> a(x.begin(), x.end());
  transform(a, false);
  return a;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  if (std::min(x.size(), h.size()) <= 64) {
    std::vector<double> y(out_len, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
    }
    return y;
  }
  const std::size_t m = next_pow2(out_len);
  std::vector<cplx> X(m), H(m);
  std::copy(x.begin(), x.end(), X.begin());
  std::copy(h.begin(), h.end(), H.begin());
  radix2(X, false);
  radix2(H, false);
  for (std::size_t i = 0; i < m; ++i) X[i] *= H[i];
  radix2(X, true);
  std::vector<double> y(out_len);
  const double inv = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < out_len; ++i) y[i] = X[i].real() * inv;
  return y;
}

}  // namespace spikeosc::dsp
