#pragma once

#include <cstdint>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::train {

struct ReadoutConfig {
  std::size_t pool_factor = 20;  // 40 ms / dt
  std::size_t hidden = 512;      // phoneme features
  std::size_t n_outputs = 40;    // classes including the CTC blank
  double leaky_slope = 0.01;

  /// Pool size giving 25 Hz output frames for the given step.
  static std::size_t pool_for_dt(double dt_ms);
  friend bool operator==(const ReadoutConfig&, const ReadoutConfig&) = default;
};

// Average pooling, then FC + LeakyReLU, FC + LeakyReLU, FC + log-softmax.
struct Readout {
  ReadoutConfig config;
  std::size_t n_in = 0;
  MatrixD W1, W2, W3;  // (in x out) each
  std::vector<double> b1, b2, b3;

  static Readout initialise(std::size_t n_in, const ReadoutConfig& config, std::uint64_t seed);
  /// Same shapes, all zero; used as a gradient accumulator.
  Readout zeros_like() const;

  friend bool operator==(const Readout&, const Readout&) = default;
};

struct ReadoutTrace {
  MatrixD pooled;
  MatrixD z1, h1, z2, h2;
  MatrixD logprobs;
};

/// Number of pooled frames for T input steps (tail zero-padded).
std::size_t pooled_length(std::size_t T, std::size_t pool_factor) noexcept;

/// Non-overlapping mean pooling with zero padding of the tail.
MatrixD average_pool(const MatrixD& x, std::size_t pool_factor);

void log_softmax_rows(MatrixD& m);

/// Log-probability lattice (pooled time x n_outputs); every row log-sum-exps to 0.
MatrixD readout_forward(const MatrixD& spikes, const Readout& readout,
                        ReadoutTrace* trace = nullptr);

/// Accumulates parameter gradients into `grad` and returns dLoss/dSpikes (T x N).
MatrixD readout_backward(const MatrixD& spikes, const Readout& readout, const ReadoutTrace& trace,
                         const MatrixD& grad_logprobs, Readout& grad);

}  // namespace spikeosc::train
