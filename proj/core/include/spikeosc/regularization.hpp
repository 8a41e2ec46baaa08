#pragma once

#include <span>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::train {

/// Boxcar surrogate derivative of the spike threshold: 0.5 on |u - 1| <= 0.5.
double boxcar_surrogate(double u) noexcept;

struct FiringRateStats {
  // rates[utterance][layer][neuron], Hz
  std::vector<std::vector<std::vector<double>>> rates;
  std::vector<double> durations_s;

  double mean_rate_hz() const;
  double layer_mean_rate_hz(std::size_t layer) const;
};

/// Rates in Hz for one layer: (sum over time of s) / duration. Returns a
/// batch x neurons matrix. Durations must be positive.
MatrixD firing_rates(const SpikeTensor& spikes, std::span<const double> durations_s);

/// Stacks per-layer rates into per-utterance statistics.
FiringRateStats firing_rates(std::span<const SpikeTensor> layers,
                             std::span<const double> durations_s);

/// Nyquist of the 1/dt sampling, in Hz.
double nyquist_hz(double dt_ms) noexcept;

inline constexpr double kDefaultMinRateHz = 0.5;

/// Mean over (utterance, layer) of the per-layer neuron mean of
/// ReLU(f_min - f) + ReLU(f - f_max).
double regularization_loss(const FiringRateStats& stats, double f_min, double f_max);

/// Hinge derivative with respect to a single rate.
double regularization_rate_gradient(double rate, double f_min, double f_max) noexcept;

}  // namespace spikeosc::train
