#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spikeosc/neuron.hpp"
#include "spikeosc/tensor.hpp"

namespace spikeosc::net {

enum class WeightInit {
  fan_in,       // uniform in [-k, k], k = 1/sqrt(fan_in)
  fluctuation,  // uniform, scaled so the summed input has unit std at the expected presynaptic rate
};

struct LayerSpec {
  std::size_t n_neurons = 0;
  double sfa_fraction = 0.5;
  double ff_connectivity = 1.0;
  double rec_connectivity = 0.5;
  bool dale_enabled = false;
  double excitatory_fraction = 0.5;
  WeightInit init = WeightInit::fluctuation;
  double init_rate_hz = 6.0;  // presynaptic rate assumed by fluctuation init

  void validate() const;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Per-neuron dynamics constants stored as parallel arrays so each one is a
// single trainable tensor.
struct NeuronParams {
  std::vector<double> tau_u;
  std::vector<double> tau_w;
  std::vector<double> a;
  std::vector<double> b;

  void resize(std::size_t n);
  std::size_t size() const noexcept { return tau_u.size(); }
  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

// Layer 0 holds the auditory nerve fibers: LIF, no weights, driven directly by
// real-valued currents. Layers >= 1 receive I_t = W^T s^{l-1}_t + V^T s^l_{t-1}.
struct Layer {
  bool nerve = false;
  std::size_t n_in = 0;
  std::size_t n = 0;
  MatrixD W;                          // n_in x n, feedforward (presynaptic rows)
  MatrixD V;                          // n x n, recurrent, zero diagonal
  Matrix<std::uint8_t> W_mask;
  Matrix<std::uint8_t> V_mask;
  std::vector<std::uint8_t> sfa_mask;  // 1 = AdLIF, 0 = LIF
  std::vector<std::int8_t> dale_signs; // sign of this layer's outgoing synapses; empty if Dale off
  NeuronParams params;

  /// Parameters with the SFA mask applied (a = b = 0 for LIF neurons).
  neuron::AdLIFParameters effective_params(std::size_t i) const;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct NetworkTopology {
  double dt_ms = 2.0;
  bool dale_enabled = false;
  bool strict_stability = false;
  std::vector<Layer> layers;

  std::size_t n_fibers() const { return layers.empty() ? 0 : layers.front().n; }
  std::vector<std::size_t> layer_sizes() const;

  /// Re-imposes every structural invariant: parameter ranges, masks, zero
  /// recurrent diagonal and Dale signs. Called after every optimizer step.
  void enforce_constraints();

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

/// Fixed random binary mask with round(connectivity * eligible) ones sampled
/// uniformly without replacement. Recurrent masks never select the diagonal.
Matrix<std::uint8_t> build_masks(std::size_t rows, std::size_t cols, double connectivity,
                                 std::uint64_t seed, bool recurrent);

/// out[j,k] = sign_j * |in[j,k]|, rows indexed by presynaptic neuron. Zeros stay +0.
MatrixD apply_dale(const MatrixD& weights, std::span<const std::int8_t> signs);
void apply_dale_inplace(MatrixD& weights, std::span<const std::int8_t> signs);

/// I_t = W^T s^{l-1}_t + V^T s^l_{t-1}, indexed by postsynaptic neuron.
std::vector<double> layer_stimulus(const MatrixD& W, const MatrixD& V,
                                   std::span<const double> s_prev_layer,
                                   std::span<const double> s_same_layer_prev);

/// Half-width k of the uniform weight distribution for one matrix. Under
/// fluctuation init, `share` is the fraction of the unit input variance this
/// matrix contributes.
double init_bound(const LayerSpec& spec, double fan_in, double dt_ms, double share);

NetworkTopology build_topology(std::size_t n_fibers, std::span<const LayerSpec> specs,
                               double dt_ms, std::uint64_t seed);

enum class SpikeFunction {
  heaviside,  // s = [u >= 1]
  soft_ramp,  // s = clip(0.5 (u - 0.5), 0, 1), differentiable stand-in for gradient checks
};

double spike_value(SpikeFunction f, double u) noexcept;
double spike_derivative(SpikeFunction f, double u) noexcept;

// Recorded forward states of one layer for one utterance, all T x n.
struct LayerTrace {
  MatrixD u;
  MatrixD w;
  MatrixD s;
  MatrixD I;
};

/// Runs one layer over a whole utterance. `input` is T x n for the nerve layer
/// (currents) and T x n_in spikes otherwise. Throws Errc::numeric_overflow on a
/// non-finite stimulus, naming the layer and step.
LayerTrace run_layer(const Layer& layer, const MatrixD& input, double dt_ms, SpikeFunction f,
                     std::size_t layer_index);

/// Spikes of every layer (nerve fibers first) for a batch of input currents.
std::vector<SpikeTensor> simulate_network(const Tensor3& input_currents,
                                          const NetworkTopology& topology);

}  // namespace spikeosc::net
