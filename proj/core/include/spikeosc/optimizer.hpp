#pragma once

#include <cstddef>
#include <vector>

#include "spikeosc/model.hpp"

namespace spikeosc::train {

struct AdamWOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;  // applied to weights and biases, never to neuron constants
  double grad_clip = 0.0;      // global L2 norm; 0 disables
};

// Decoupled-weight-decay Adam over the parameter list of a Model.
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  /// One update of `model` from `grad` (same layout). Re-imposes the model
  /// constraints afterwards. Returns the global gradient norm before clipping.
  double step(Model& model, Model& grad);

  std::size_t steps() const noexcept { return t_; }
  const AdamWOptions& options() const noexcept { return options_; }

 private:
  AdamWOptions options_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace spikeosc::train
