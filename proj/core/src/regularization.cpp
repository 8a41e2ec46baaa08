#include "spikeosc/regularization.hpp"

#include <cmath>

#include "spikeosc/errors.hpp"

namespace spikeosc::train {

double boxcar_surrogate(double u) noexcept { return std::abs(u - 1.0) <= 0.5 ? 0.5 : 0.0; }

double FiringRateStats::mean_rate_hz() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& utt : rates) {
    for (const auto& layer : utt) {
      for (double r : layer) sum += r;
      n += layer.size();
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double FiringRateStats::layer_mean_rate_hz(std::size_t layer) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& utt : rates) {
    for (double r : utt.at(layer)) sum += r;
    n += utt.at(layer).size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MatrixD firing_rates(const SpikeTensor& spikes, std::span<const double> durations_s) {
  if (durations_s.size() != spikes.batch) {
    throw Error(Errc::shape_mismatch, "one duration per utterance is required");
  }
  MatrixD out(spikes.batch, spikes.neurons);
  for (std::size_t b = 0; b < spikes.batch; ++b) {
    if (!(durations_s[b] > 0.0)) {
      throw Error(Errc::invalid_parameter, "utterance duration must be positive");
    }
    for (std::size_t t = 0; t < spikes.time; ++t) {
      for (std::size_t n = 0; n < spikes.neurons; ++n) out(b, n) += spikes.at(b, t, n);
    }
    for (auto& r : out.row(b)) r /= durations_s[b];
  }
  return out;
}

FiringRateStats firing_rates(std::span<const SpikeTensor> layers,
                             std::span<const double> durations_s) {
  FiringRateStats stats;
  stats.durations_s.assign(durations_s.begin(), durations_s.end());
  stats.rates.resize(durations_s.size());
  for (const auto& layer : layers) {
    const MatrixD r = firing_rates(layer, durations_s);
    for (std::size_t b = 0; b < r.rows(); ++b) {
      stats.rates[b].emplace_back(r.row(b).begin(), r.row(b).end());
    }
  }
  return stats;
}

double nyquist_hz(double dt_ms) noexcept { return 500.0 / dt_ms; }

double regularization_loss(const FiringRateStats& stats, double f_min, double f_max) {
  if (!(f_min < f_max)) throw Error(Errc::invalid_parameter, "f_min must be below f_max");
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& utt : stats.rates) {
    for (const auto& layer : utt) {
      if (layer.empty()) continue;
      double s = 0.0;
      for (double f : layer) s += std::max(0.0, f_min - f) + std::max(0.0, f - f_max);
      total += s / static_cast<double>(layer.size());
      ++terms;
    }
  }
  return terms == 0 ? 0.0 : total / static_cast<double>(terms);
}

double regularization_rate_gradient(double rate, double f_min, double f_max) noexcept {
  if (rate < f_min) return -1.0;
  if (rate > f_max) return 1.0;
  return 0.0;
}

}  // namespace spikeosc::train
