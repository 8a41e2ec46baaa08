#include "spikeosc/trainer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spikeosc/ctc.hpp"
#include "parallel.hpp"
#include "spikeosc/errors.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::train {

namespace {

void add_into(Model& acc, Model& g) {
  auto a = parameters(acc);
  auto b = parameters(g);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) a[k].values[i] += b[k].values[i];
  }
}

double mean_rate(const ForwardPass& pass) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& layer : pass.rates_hz) {
    for (double r : layer) sum += r;
    n += layer.size();
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}


}  // namespace

Model batch_gradient(const Model& model, std::span<const Example> batch, std::uint64_t step_seed,
                     bool training, const StepOptions& options, LossBreakdown* loss) {
  if (batch.empty()) throw Error(Errc::invalid_parameter, "batch is empty");
  const std::size_t B = batch.size();
  const double scale = 1.0 / static_cast<double>(B);
  std::vector<Model> grads(B);
  std::vector<LossBreakdown> losses(B);

  detail::parallel_for(B, options.threads, [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(step_seed, {i}));
    PassOptions pass_opts{options.spike, training, training ? &rng : nullptr};
    const auto& ex = batch[i];
    ForwardPass pass = forward(model, ex.features, &ex.target, pass_opts);
    if (!std::isfinite(pass.total)) {
      std::ostringstream msg;
      msg << "non-finite loss on example " << i << " (" << ex.id << "): ctc=" << pass.ctc
          << " reg=" << pass.reg;
      throw Error(Errc::divergence, msg.str());
    }
    losses[i] = {pass.ctc, pass.reg, pass.total, mean_rate(pass)};
    grads[i] = model.zeros_like();
    backward(model, ex.features, ex.target, pass, pass_opts, scale, grads[i]);
  });

  Model total = model.zeros_like();
  LossBreakdown sum;
  for (std::size_t i = 0; i < B; ++i) {
    add_into(total, grads[i]);
    sum.ctc += losses[i].ctc * scale;
    sum.reg += losses[i].reg * scale;
    sum.total += losses[i].total * scale;
    sum.mean_firing_rate_hz += losses[i].mean_firing_rate_hz * scale;
  }
  if (loss) *loss = sum;
  return total;
}

LossBreakdown train_step(Model& model, AdamW& optimizer, std::span<const Example> batch,
                         std::uint64_t step_seed, const StepOptions& options) {
  LossBreakdown loss;
  Model grad = batch_gradient(model, batch, step_seed, true, options, &loss);
  try {
    optimizer.step(model, grad);
  } catch (const Error& e) {
    if (e.code() != Errc::divergence) throw;
    std::ostringstream msg;
    msg << "gradient diverged at optimizer step " << optimizer.steps() + 1
        << " (loss total=" << loss.total << ")";
    throw Error(Errc::divergence, msg.str());
  }
  return loss;
}

int classify(const MatrixD& logprobs) {
  int best = -1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t c = 1; c < logprobs.cols(); ++c) {
    const int target[1] = {static_cast<int>(c)};
    const double l = ctc_loss(logprobs, target, false).loss;
    if (l < best_loss) {
      best_loss = l;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Evaluation evaluate(const Model& model, std::span<const Example> data, bool classification,
                    const StepOptions& options) {
  Evaluation ev;
  ev.n = data.size();
  if (data.empty()) return ev;
  const std::size_t L = model.topology.layers.size();
  std::vector<LossBreakdown> losses(data.size());
  std::vector<int> correct(data.size(), 0);
  std::vector<double> errors(data.size(), 0.0), lengths(data.size(), 0.0);
  std::vector<std::vector<double>> rates(data.size(), std::vector<double>(L, 0.0));

  detail::parallel_for(data.size(), options.threads, [&](std::size_t i) {
    const auto& ex = data[i];
    PassOptions opts{options.spike, false, nullptr};
    ForwardPass pass = forward(model, ex.features, &ex.target, opts);
    losses[i] = {pass.ctc, pass.reg, pass.total, mean_rate(pass)};
    for (std::size_t l = 0; l < L; ++l) {
      double s = 0.0;
      for (double r : pass.rates_hz[l]) s += r;
      rates[i][l] = s / static_cast<double>(pass.rates_hz[l].size());
    }
    if (classification) {
      correct[i] = classify(pass.logprobs) == ex.label ? 1 : 0;
    } else {
      const auto decoded = ctc_greedy_decode(pass.logprobs);
      errors[i] = static_cast<double>(edit_distance(decoded, ex.target));
      lengths[i] = static_cast<double>(ex.target.size());
    }
  });

  const double inv = 1.0 / static_cast<double>(data.size());
  ev.layer_rates_hz.assign(L, 0.0);
  double err = 0.0, len = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ev.loss.ctc += losses[i].ctc * inv;
    ev.loss.reg += losses[i].reg * inv;
    ev.loss.total += losses[i].total * inv;
    ev.loss.mean_firing_rate_hz += losses[i].mean_firing_rate_hz * inv;
    for (std::size_t l = 0; l < L; ++l) ev.layer_rates_hz[l] += rates[i][l] * inv;
    acc += correct[i];
    err += errors[i];
    len += lengths[i];
  }
  ev.accuracy = acc * inv;
  ev.token_error_rate = len > 0.0 ? err / len : 0.0;
  return ev;
}

}  // namespace spikeosc::train
