#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikeosc/model.hpp"
#include "spikeosc/optimizer.hpp"

namespace spikeosc::train {

// One utterance ready for the network: log-mel features plus its label sequence.
struct Example {
  std::string id;
  MatrixD features;         // T x n_mels
  std::vector<int> target;  // CTC labels, never the blank
  int label = -1;           // class index for classification tasks (target == {label})
};

struct LossBreakdown {
  double ctc = 0.0;
  double reg = 0.0;
  double total = 0.0;
  double mean_firing_rate_hz = 0.0;
};

struct StepOptions {
  net::SpikeFunction spike = net::SpikeFunction::heaviside;
  std::size_t threads = 1;  // per-example work fan-out; results do not depend on it
};

/// Forward, backward and one optimizer update on `batch`. The step seed drives
/// dropout and is combined with each example's position in the batch.
/// Throws Errc::divergence when a loss or gradient is not finite.
LossBreakdown train_step(Model& model, AdamW& optimizer, std::span<const Example> batch,
                         std::uint64_t step_seed, const StepOptions& options = {});

/// Gradient of the mean batch loss without touching the model (dropout off
/// unless a seed is supplied through `training`).
Model batch_gradient(const Model& model, std::span<const Example> batch, std::uint64_t step_seed,
                     bool training, const StepOptions& options, LossBreakdown* loss = nullptr);

struct Evaluation {
  LossBreakdown loss;
  double accuracy = 0.0;           // classification: argmin-CTC class matches label
  double token_error_rate = 0.0;   // sequence tasks: edit distance / target length
  std::vector<double> layer_rates_hz;
  std::size_t n = 0;
};

/// Class whose single-label CTC loss is lowest on the lattice.
int classify(const MatrixD& logprobs);

Evaluation evaluate(const Model& model, std::span<const Example> data, bool classification,
                    const StepOptions& options = {});

}  // namespace spikeosc::train
