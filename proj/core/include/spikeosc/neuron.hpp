#pragma once

#include <complex>
#include <span>

namespace spikeosc::neuron {

// Dimensionless reduction: threshold 1, resting and reset potential 0.
inline constexpr double kThreshold = 1.0;

struct ParameterRange {
  double lo;
  double hi;
};

inline constexpr ParameterRange kTauURange{3.0, 25.0};    // ms
inline constexpr ParameterRange kTauWRange{30.0, 350.0};  // ms
inline constexpr ParameterRange kARange{-0.5, 5.0};
inline constexpr ParameterRange kBRange{0.0, 2.0};

struct AdLIFParameters {
  double tau_u = 10.0;  // membrane time constant, ms
  double tau_w = 100.0; // adaptation time constant, ms
  double a = 0.0;       // subthreshold coupling
  double b = 0.0;       // spike-triggered adaptation increment

  bool is_lif() const noexcept { return a == 0.0 && b == 0.0; }
  friend bool operator==(const AdLIFParameters&, const AdLIFParameters&) = default;
};

struct NeuronState {
  double u = 0.0;
  double w = 0.0;
  bool s = false;

  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

struct DecayFactors {
  double alpha;  // exp(-dt / tau_u)
  double beta;   // exp(-dt / tau_w)
};

struct StabilityBounds {
  double a_min_exclusive;
  double a_max_inclusive;
};

struct Eigenvalues {
  std::complex<double> lambda1;  // larger real part (ties: larger imaginary part)
  std::complex<double> lambda2;
};

// Spike-response-model kernels equivalent to the linear two-variable dynamics:
//   kappa(s) = beta1 e^{lambda1 s} + beta2 e^{lambda2 s}
//   eta(s)   = gamma1 e^{lambda1 s} + gamma2 e^{lambda2 s}
struct KernelCoefficients {
  std::complex<double> lambda1;
  std::complex<double> lambda2;
  std::complex<double> beta1;
  std::complex<double> beta2;
  std::complex<double> gamma1;
  std::complex<double> gamma2;
  double tau_u = 0.0;
};

/// Projects each parameter onto its admissible range. With `strict_stability`
/// the coupling `a` is additionally capped at the oscillation-free bound.
/// Throws Errc::invalid_parameter on non-finite input.
AdLIFParameters clamp_parameters(const AdLIFParameters& raw, bool strict_stability = false);

/// Throws Errc::invalid_timestep when dt_ms <= 0.
DecayFactors decay_factors(const AdLIFParameters& params, double dt_ms);

/// One exponential-Euler update. The adaptation update reads the previous
/// membrane potential and the reset subtracts the previous spike before decay.
NeuronState step(const NeuronState& state, const AdLIFParameters& params, double stimulus,
                 DecayFactors factors) noexcept;

/// Same update with the threshold disabled (s stays 0). Used to study the free
/// linear system.
NeuronState step_subthreshold(const NeuronState& state, const AdLIFParameters& params,
                              double stimulus, DecayFactors factors) noexcept;

Eigenvalues eigenvalues(const AdLIFParameters& params);

StabilityBounds stability_bounds(double tau_u, double tau_w);

bool is_stable(const AdLIFParameters& params);

/// Throws Errc::degenerate_kernel for a repeated eigenvalue.
KernelCoefficients kernel_coefficients(const AdLIFParameters& params);

/// Membrane response to a unit input pulse, s >= 0 (zero for s < 0).
double input_kernel(const KernelCoefficients& k, double s);

/// Membrane response to an emitted spike.
double reset_kernel(const KernelCoefficients& k, double s);

/// Adaptation-current response to an emitted spike, recovered from the
/// membrane equation as w = -u - tau_u du/ds (no input present).
double reset_kernel_adaptation(const KernelCoefficients& k, double s);

/// Adaptation-current response to a unit input pulse, for s > 0.
double input_kernel_adaptation(const KernelCoefficients& k, double s);

/// u(t) as the superposition of input and reset kernels. Events strictly
/// after t contribute nothing.
double analytic_response(const KernelCoefficients& k, std::span<const double> input_times,
                         std::span<const double> spike_times, double t);

/// Weighted variant: input pulse i raises u by input_weights[i].
double analytic_response(const KernelCoefficients& k, std::span<const double> input_times,
                         std::span<const double> input_weights,
                         std::span<const double> spike_times, double t);

}  // namespace spikeosc::neuron
