#include "spikeosc/optimizer.hpp"

#include <cmath>

#include "spikeosc/errors.hpp"

namespace spikeosc::train {

double AdamW::step(Model& model, Model& grad) {
  auto params = parameters(model);
  auto grads = parameters(grad);
  if (params.size() != grads.size()) {
    throw Error(Errc::shape_mismatch, "gradient layout differs from model");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.values.size(), 0.0);
      v_.emplace_back(p.values.size(), 0.0);
    }
  }
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw Error(Errc::divergence, "non-finite gradient");
  const double clip =
      options_.grad_clip > 0.0 && norm > options_.grad_clip ? options_.grad_clip / norm : 1.0;

  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    const auto& g = grads[k];
    if (p.values.size() != g.values.size() || p.values.size() != m_[k].size()) {
      throw Error(Errc::shape_mismatch, "parameter " + p.name + " changed shape");
    }
    const double decay = p.kind == ParamKind::neuron ? 0.0 : options_.weight_decay;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double gi = g.values[i] * clip;
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * gi;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * gi * gi;
      p.values[i] -= lr * decay * p.values[i];
      p.values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.epsilon);
    }
  }
  model.topology.enforce_constraints();
  return norm;
}

}  // namespace spikeosc::train
