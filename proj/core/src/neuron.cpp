#include "spikeosc/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikeosc/errors.hpp"

namespace spikeosc::neuron {

namespace {

double project(double v, ParameterRange r) { return std::clamp(v, r.lo, r.hi); }

template <bool Spiking>
NeuronState advance(const NeuronState& prev, const AdLIFParameters& p, double stimulus,
                    DecayFactors f) noexcept {
  const double s_prev = prev.s ? 1.0 : 0.0;
  NeuronState next;
  next.u = f.alpha * (prev.u - s_prev) + (1.0 - f.alpha) * (stimulus - prev.w);
  next.w = f.beta * (prev.w + p.b * s_prev) + (1.0 - f.beta) * p.a * prev.u;
  next.s = Spiking && next.u >= kThreshold;
  return next;
}

std::complex<double> exp_term(std::complex<double> c, std::complex<double> lambda, double s) {
  return c * std::exp(lambda * s);
}

}  // namespace

AdLIFParameters clamp_parameters(const AdLIFParameters& raw, bool strict_stability) {
  if (!std::isfinite(raw.tau_u) || !std::isfinite(raw.tau_w) || !std::isfinite(raw.a) ||
      !std::isfinite(raw.b)) {
    throw Error(Errc::invalid_parameter, "neuron parameters must be finite");
  }
  AdLIFParameters out{project(raw.tau_u, kTauURange), project(raw.tau_w, kTauWRange),
                      project(raw.a, kARange), project(raw.b, kBRange)};
  if (strict_stability) {
    out.a = std::min(out.a, stability_bounds(out.tau_u, out.tau_w).a_max_inclusive);
  }
  return out;
}

DecayFactors decay_factors(const AdLIFParameters& params, double dt_ms) {
  if (!(dt_ms > 0.0)) {
    throw Error(Errc::invalid_timestep, "time step must be positive, got " + std::to_string(dt_ms));
  }
  return {std::exp(-dt_ms / params.tau_u), std::exp(-dt_ms / params.tau_w)};
}

NeuronState step(const NeuronState& state, const AdLIFParameters& params, double stimulus,
                 DecayFactors factors) noexcept {
  return advance<true>(state, params, stimulus, factors);
}

NeuronState step_subthreshold(const NeuronState& state, const AdLIFParameters& params,
                              double stimulus, DecayFactors factors) noexcept {
  return advance<false>(state, params, stimulus, factors);
}

Eigenvalues eigenvalues(const AdLIFParameters& params) {
  // lambda^2 + lambda (1/tau_u + 1/tau_w) + (1 + a) / (tau_u tau_w) = 0
  const double trace = 1.0 / params.tau_u + 1.0 / params.tau_w;
  const double det = (1.0 + params.a) / (params.tau_u * params.tau_w);
  const std::complex<double> disc = std::sqrt(std::complex<double>(trace * trace - 4.0 * det, 0.0));
  std::complex<double> r1 = 0.5 * (-trace + disc);
  std::complex<double> r2 = 0.5 * (-trace - disc);
  // Recompute the smaller-magnitude real root from the product to avoid cancellation.
  if (disc.imag() == 0.0 && det != 0.0) {
    r1 = std::complex<double>(det / r2.real(), 0.0);
  }
  const auto larger = [](std::complex<double> x, std::complex<double> y) {
    return x.real() > y.real() || (x.real() == y.real() && x.imag() > y.imag());
  };
  if (larger(r2, r1)) std::swap(r1, r2);
  return {r1, r2};
}

StabilityBounds stability_bounds(double tau_u, double tau_w) {
  const double d = tau_w - tau_u;
  return {-1.0, d * d / (4.0 * tau_u * tau_w)};
}

bool is_stable(const AdLIFParameters& params) {
  const auto b = stability_bounds(params.tau_u, params.tau_w);
  return params.a > b.a_min_exclusive && params.a <= b.a_max_inclusive;
}

KernelCoefficients kernel_coefficients(const AdLIFParameters& params) {
  const auto [l1, l2] = eigenvalues(params);
  const double scale = std::abs(l1) + std::abs(l2);
  if (std::abs(l2 - l1) <= 1e-6 * scale) {
    throw Error(Errc::degenerate_kernel, "repeated eigenvalue, kernel coefficients undefined");
  }
  const double tu = params.tau_u;
  const std::complex<double> denom = tu * (l2 - l1);
  KernelCoefficients k;
  k.lambda1 = l1;
  k.lambda2 = l2;
  k.beta1 = (tu * l2 + 1.0) / denom;
  k.beta2 = 1.0 - k.beta1;
  k.gamma1 = (params.b - (tu * l2 + 1.0)) / denom;
  k.gamma2 = -1.0 - k.gamma1;
  k.tau_u = tu;
  return k;
}

double input_kernel(const KernelCoefficients& k, double s) {
  if (s < 0.0) return 0.0;
  return (exp_term(k.beta1, k.lambda1, s) + exp_term(k.beta2, k.lambda2, s)).real();
}

double reset_kernel(const KernelCoefficients& k, double s) {
  if (s < 0.0) return 0.0;
  return (exp_term(k.gamma1, k.lambda1, s) + exp_term(k.gamma2, k.lambda2, s)).real();
}

double reset_kernel_adaptation(const KernelCoefficients& k, double s) {
  if (s < 0.0) return 0.0;
  const auto u = exp_term(k.gamma1, k.lambda1, s) + exp_term(k.gamma2, k.lambda2, s);
  const auto du = exp_term(k.gamma1 * k.lambda1, k.lambda1, s) +
                  exp_term(k.gamma2 * k.lambda2, k.lambda2, s);
  return (-u - k.tau_u * du).real();
}

double input_kernel_adaptation(const KernelCoefficients& k, double s) {
  if (s < 0.0) return 0.0;
  const auto u = exp_term(k.beta1, k.lambda1, s) + exp_term(k.beta2, k.lambda2, s);
  const auto du = exp_term(k.beta1 * k.lambda1, k.lambda1, s) +
                  exp_term(k.beta2 * k.lambda2, k.lambda2, s);
  return (-u - k.tau_u * du).real();
}

double analytic_response(const KernelCoefficients& k, std::span<const double> input_times,
                         std::span<const double> spike_times, double t) {
  double u = 0.0;
  for (double ti : input_times) u += input_kernel(k, t - ti);
  for (double tf : spike_times) u += reset_kernel(k, t - tf);
  return u;
}

double analytic_response(const KernelCoefficients& k, std::span<const double> input_times,
                         std::span<const double> input_weights,
                         std::span<const double> spike_times, double t) {
  if (input_times.size() != input_weights.size()) {
    throw Error(Errc::shape_mismatch, "input_times and input_weights differ in length");
  }
  double u = 0.0;
  for (std::size_t i = 0; i < input_times.size(); ++i) {
    u += input_weights[i] * input_kernel(k, t - input_times[i]);
  }
  for (double tf : spike_times) u += reset_kernel(k, t - tf);
  return u;
}

}  // namespace spikeosc::neuron
