#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spikeosc/frontend.hpp"
#include "spikeosc/network.hpp"
#include "spikeosc/readout.hpp"

namespace spikeosc::train {

struct ModelConfig {
  double dt_ms = 2.0;
  std::size_t n_mels = 80;
  std::size_t cnn_channels = 16;
  std::vector<net::LayerSpec> layers;
  ReadoutConfig readout;
  frontend::CnnOptions cnn;
  double reg_weight = 0.1;
  double f_min_hz = 0.5;
  double f_max_hz = 0.0;       // 0 selects the Nyquist frequency 500 / dt
  bool reset_gradient = true;  // surrogate gradient flows through the reset term
  bool strict_stability = false;

  double effective_f_max() const noexcept;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Complete waveform-to-log-probability pipeline: auditory CNN, nerve fibers,
// spiking layers and readout.
struct Model {
  ModelConfig config;
  frontend::AuditoryCnn cnn;
  net::NetworkTopology topology;
  Readout readout;

  static Model initialise(const ModelConfig& config, std::uint64_t seed);

  /// Same shapes with every trainable entry zero (gradient accumulator).
  Model zeros_like() const;

  friend bool operator==(const Model&, const Model&) = default;
};

enum class ParamKind { weight, bias, neuron };

struct ParamRef {
  std::string name;
  std::span<double> values;
  ParamKind kind;
  std::span<const std::uint8_t> mask{};  // entries with mask 0 are structurally fixed; empty = all free
};

/// Every trainable tensor in a fixed order. Calling this on a model and on its
/// zeros_like() gradient yields aligned lists.
std::vector<ParamRef> parameters(Model& model);

struct PassOptions {
  net::SpikeFunction spike = net::SpikeFunction::heaviside;
  bool training = false;
  std::mt19937_64* dropout_rng = nullptr;
};

struct ForwardPass {
  frontend::CnnTrace cnn;
  MatrixD currents;
  std::vector<net::LayerTrace> layers;
  ReadoutTrace readout;
  MatrixD logprobs;
  std::vector<std::vector<double>> rates_hz;  // [layer][neuron]
  double duration_s = 0.0;
  double ctc = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

/// Runs the full pipeline on one utterance. When `target` is non-null the
/// CTC loss, the firing-rate penalty and their weighted sum are filled in.
ForwardPass forward(const Model& model, const MatrixD& features, const std::vector<int>* target,
                    const PassOptions& options);

/// Backpropagation through time of `scale * total` for a recorded forward
/// pass; gradients are accumulated into `grad`.
void backward(const Model& model, const MatrixD& features, const std::vector<int>& target,
              const ForwardPass& pass, const PassOptions& options, double scale, Model& grad);

}  // namespace spikeosc::train
