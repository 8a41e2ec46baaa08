#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spikeosc::osc {

struct FrequencyBand {
  std::string name;
  double lo = 0.0;  // Hz
  double hi = 0.0;  // Hz
};

/// delta, theta, alpha, beta, low-gamma, high-gamma.
const std::array<FrequencyBand, 6>& canonical_bands();
/// Throws Errc::invalid_band for an unknown name.
const FrequencyBand& band_by_name(std::string_view name);

/// Odd tap count: at least three cycles of the lower edge, enough taps for a
/// Hamming transition of half the bandwidth, and never fewer than 33.
std::size_t bandpass_length(const FrequencyBand& band, double fs);

/// Linear-phase Hamming-windowed sinc band-pass normalised to unit gain at the
/// band centre. Throws Errc::invalid_band unless 0 < lo < hi < fs / 2.
std::vector<double> design_bandpass(const FrequencyBand& band, double fs);

/// H(f) = sum_n h[n] e^{-2 pi i f n / fs}.
std::complex<double> frequency_response(std::span<const double> taps, double f_hz, double fs);

/// Zero-phase (forward-backward) filtering. Output has the input length; the
/// first and last taps.size() samples carry edge transients. Throws
/// Errc::too_short unless signal.size() > 3 * taps.size().
std::vector<double> filter_zero_phase(std::span<const double> signal,
                                      std::span<const double> taps);

struct AnalyticSignal {
  std::vector<double> phase;      // radians in (-pi, pi]
  std::vector<double> amplitude;  // envelope, >= 0
};

/// Frequency-domain analytic signal (negative frequencies zeroed, positive
/// doubled). Throws Errc::too_short for fewer than 8 samples.
AnalyticSignal analytic_signal(std::span<const double> x);

}  // namespace spikeosc::osc
