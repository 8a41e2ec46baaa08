#include "spikeosc/filters.hpp"

#include <cmath>
#include <numbers>

#include "spikeosc/errors.hpp"
#include "spikeosc/fft.hpp"

namespace spikeosc::osc {

namespace {

std::size_t round_odd(double x) {
  auto n = static_cast<std::size_t>(std::llround(x));
  return n % 2 ? n : n + 1;
}

// Windowed ideal low-pass with cutoff fc (Hz), centred at (M - 1) / 2.
double sinc_lowpass(double fc, double fs, double m) {
  const double w = 2.0 * fc / fs;
  if (m == 0.0) return w;
  return std::sin(std::numbers::pi * w * m) / (std::numbers::pi * m);
}

}  // namespace

const std::array<FrequencyBand, 6>& canonical_bands() {
  static const std::array<FrequencyBand, 6> bands{{
      {"delta", 0.5, 4.0},
      {"theta", 4.0, 8.0},
      {"alpha", 8.0, 13.0},
      {"beta", 13.0, 30.0},
      {"low-gamma", 30.0, 80.0},
      {"high-gamma", 80.0, 150.0},
  }};
  return bands;
}

const FrequencyBand& band_by_name(std::string_view name) {
  for (const auto& b : canonical_bands()) {
    if (b.name == name) return b;
  }
  throw Error(Errc::invalid_band, "unknown band '" + std::string(name) + "'");
}

std::size_t bandpass_length(const FrequencyBand& band, double fs) {
  const double half_width = 0.5 * (band.hi - band.lo);
  return std::max({round_odd(3.0 * fs / band.lo), round_odd(3.3 * fs / half_width),
                   std::size_t{33}});
}

std::vector<double> design_bandpass(const FrequencyBand& band, double fs) {
  if (!(fs > 0.0) || !(band.lo > 0.0) || !(band.hi > band.lo) || !(band.hi < fs / 2.0)) {
    throw Error(Errc::invalid_band, "band " + band.name + " [" + std::to_string(band.lo) + ", " +
                                        std::to_string(band.hi) + "] Hz is not inside (0, " +
                                        std::to_string(fs / 2.0) + ") Hz");
  }
  const std::size_t M = bandpass_length(band, fs);
  const double centre = 0.5 * static_cast<double>(M - 1);
  std::vector<double> h(M);
  for (std::size_t n = 0; n < M; ++n) {
    const double m = static_cast<double>(n) - centre;
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / (M - 1));
    h[n] = (sinc_lowpass(band.hi, fs, m) - sinc_lowpass(band.lo, fs, m)) * window;
  }
  // Symmetrise exactly so the phase is linear to the last bit.
  for (std::size_t n = 0; n < M / 2; ++n) {
    const double avg = 0.5 * (h[n] + h[M - 1 - n]);
    h[n] = h[M - 1 - n] = avg;
  }
  const double gain = std::abs(frequency_response(h, 0.5 * (band.lo + band.hi), fs));
  for (auto& v : h) v /= gain;
  return h;
}

std::complex<double> frequency_response(std::span<const double> taps, double f_hz, double fs) {
  std::complex<double> acc{0.0, 0.0};
  const double w = -2.0 * std::numbers::pi * f_hz / fs;
  for (std::size_t n = 0; n < taps.size(); ++n) {
    acc += taps[n] * std::polar(1.0, w * static_cast<double>(n));
  }
  return acc;
}

std::vector<double> filter_zero_phase(std::span<const double> signal,
                                      std::span<const double> taps) {
  if (taps.empty() || taps.size() % 2 == 0) {
    throw Error(Errc::invalid_parameter, "zero-phase filtering needs an odd, non-empty tap set");
  }
  if (signal.size() <= 3 * taps.size()) {
    throw Error(Errc::too_short, "signal of " + std::to_string(signal.size()) +
                                     " samples is too short for a " +
                                     std::to_string(taps.size()) + "-tap filter");
  }
  const std::size_t N = signal.size();
  const std::size_t delay = (taps.size() - 1) / 2;
  // Forward pass, then the same filter over the time-reversed output.
  auto forward = dsp::convolve(signal, taps);
  std::vector<double> mid(N);
  for (std::size_t t = 0; t < N; ++t) mid[t] = forward[t + delay];
  std::vector<double> reversed(mid.rbegin(), mid.rend());
  std::vector<double> rtaps(taps.rbegin(), taps.rend());
  auto back = dsp::convolve(reversed, rtaps);
  std::vector<double> out(N);
  for (std::size_t t = 0; t < N; ++t) out[t] = back[N - 1 - t + delay];
  return out;
}

AnalyticSignal analytic_signal(std::span<const double> x) {
  const std::size_t N = x.size();
  if (N < 8) throw Error(Errc::too_short, "analytic signal needs at least 8 samples");
  auto X = dsp::fft_real(x);
  for (std::size_t k = 1; k < N; ++k) {
    if (2 * k < N) {
      X[k] *= 2.0;
    } else if (2 * k > N) {
      X[k] = 0.0;
    }
  }
  const auto z = dsp::ifft(X);
  AnalyticSignal a;
  a.phase.resize(N);
  a.amplitude.resize(N);
  for (std::size_t t = 0; t < N; ++t) {
    a.phase[t] = std::arg(z[t]);
    a.amplitude[t] = std::abs(z[t]);
  }
  return a;
}

}  // namespace spikeosc::osc
