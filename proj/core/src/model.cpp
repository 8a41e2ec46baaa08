#include "spikeosc/model.hpp"

#include <cmath>

#include "spikeosc/ctc.hpp"
#include "spikeosc/errors.hpp"
#include "spikeosc/random.hpp"
#include "spikeosc/regularization.hpp"

namespace spikeosc::train {

namespace {

MatrixD zeros(const MatrixD& m) { return MatrixD(m.rows(), m.cols()); }

std::vector<double> zeros(const std::vector<double>& v) { return std::vector<double>(v.size()); }

// Reverse-mode pass through one spiking layer over the whole utterance.
// `grad_s` holds dLoss/ds_t from everything downstream; returns dLoss/dinput.
MatrixD layer_backward(const net::Layer& layer, const MatrixD& input, const net::LayerTrace& tr,
                       const MatrixD& grad_s, double dt_ms, net::SpikeFunction spike,
                       bool reset_gradient, net::Layer& grad) {
  const std::size_t T = tr.u.rows();
  const std::size_t n = layer.n;
  std::vector<double> alpha(n), beta(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = layer.effective_params(i);
    const auto d = neuron::decay_factors(p, dt_ms);
    alpha[i] = d.alpha;
    beta[i] = d.beta;
    a[i] = p.a;
    b[i] = p.b;
  }
  std::vector<double> d_alpha(n, 0.0), d_beta(n, 0.0), d_a(n, 0.0), d_b(n, 0.0);
  std::vector<double> du_next(n, 0.0), dw_next(n, 0.0), dI_next(n, 0.0);
  std::vector<double> du(n), dw(n), dI(n);
  MatrixD dX(T, input.cols());
  const std::vector<double> zero_state(n, 0.0);

  for (std::size_t t = T; t-- > 0;) {
    const auto u = tr.u.row(t);
    const auto I = tr.I.row(t);
    const std::span<const double> u_prev = t > 0 ? tr.u.row(t - 1) : std::span<const double>(zero_state);
    const std::span<const double> w_prev = t > 0 ? tr.w.row(t - 1) : std::span<const double>(zero_state);
    const std::span<const double> s_prev = t > 0 ? tr.s.row(t - 1) : std::span<const double>(zero_state);
    const auto gs_ext = grad_s.row(t);

    for (std::size_t i = 0; i < n; ++i) {
      double gs = gs_ext[i] + beta[i] * b[i] * dw_next[i];
      if (reset_gradient) gs -= alpha[i] * du_next[i];
      if (!layer.nerve) {
        const auto vrow = layer.V.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += vrow[k] * dI_next[k];
        gs += acc;
      }
      du[i] = gs * net::spike_derivative(spike, u[i]) + alpha[i] * du_next[i] +
              (1.0 - beta[i]) * a[i] * dw_next[i];
      dw[i] = -(1.0 - alpha[i]) * du_next[i] + beta[i] * dw_next[i];
      dI[i] = (1.0 - alpha[i]) * du[i];
      d_alpha[i] += du[i] * (u_prev[i] - s_prev[i] - I[i] + w_prev[i]);
      d_beta[i] += dw[i] * (w_prev[i] + b[i] * s_prev[i] - a[i] * u_prev[i]);
      d_a[i] += dw[i] * (1.0 - beta[i]) * u_prev[i];
      d_b[i] += dw[i] * beta[i] * s_prev[i];
    }

    auto dx = dX.row(t);
    if (layer.nerve) {
      std::copy(dI.begin(), dI.end(), dx.begin());
    } else {
      const auto x = input.row(t);
      for (std::size_t j = 0; j < layer.n_in; ++j) {
        const auto wrow = layer.W.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += wrow[k] * dI[k];
        dx[j] = acc;
        if (x[j] != 0.0) {
          auto gw = grad.W.row(j);
          for (std::size_t k = 0; k < n; ++k) gw[k] += x[j] * dI[k];
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (s_prev[j] == 0.0) continue;
        auto gv = grad.V.row(j);
        for (std::size_t k = 0; k < n; ++k) gv[k] += s_prev[j] * dI[k];
      }
    }
    std::swap(du_next, du);
    std::swap(dw_next, dw);
    std::swap(dI_next, dI);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto p = layer.effective_params(i);
    grad.params.tau_u[i] += d_alpha[i] * alpha[i] * dt_ms / (p.tau_u * p.tau_u);
    if (layer.nerve) continue;
    const bool sfa = layer.sfa_mask[i] != 0;
    if (!sfa) continue;
    grad.params.tau_w[i] += d_beta[i] * beta[i] * dt_ms / (p.tau_w * p.tau_w);
    grad.params.a[i] += d_a[i];
    grad.params.b[i] += d_b[i];
  }
  if (!layer.nerve) {
    for (std::size_t i = 0; i < grad.W.size(); ++i) {
      if (!layer.W_mask.data()[i]) grad.W.data()[i] = 0.0;
    }
    for (std::size_t i = 0; i < grad.V.size(); ++i) {
      if (!layer.V_mask.data()[i]) grad.V.data()[i] = 0.0;
    }
  }
  return dX;
}

}  // namespace

double ModelConfig::effective_f_max() const noexcept {
  return f_max_hz > 0.0 ? f_max_hz : nyquist_hz(dt_ms);
}

Model Model::initialise(const ModelConfig& config, std::uint64_t seed) {
  if (config.layers.empty()) throw Error(Errc::invalid_parameter, "model needs a spiking layer");
  Model m;
  m.config = config;
  m.cnn = frontend::AuditoryCnn::initialise(config.cnn_channels, config.n_mels,
                                            derive_seed(seed, {101}));
  m.topology = net::build_topology(m.cnn.n_fibers(), config.layers, config.dt_ms,
                                   derive_seed(seed, {102}));
  m.topology.strict_stability = config.strict_stability;
  m.topology.enforce_constraints();
  m.readout = Readout::initialise(m.topology.layers.back().n, config.readout,
                                  derive_seed(seed, {103}));
  return m;
}

Model Model::zeros_like() const {
  Model z;
  z.config = config;
  z.cnn = cnn;
  for (auto* v : {&z.cnn.kernels, &z.cnn.bias, &z.cnn.ln_gain, &z.cnn.ln_bias}) {
    std::fill(v->begin(), v->end(), 0.0);
  }
  z.topology = topology;
  for (auto& l : z.topology.layers) {
    l.W = zeros(l.W);
    l.V = zeros(l.V);
    l.params.tau_u = zeros(l.params.tau_u);
    l.params.tau_w = zeros(l.params.tau_w);
    l.params.a = zeros(l.params.a);
    l.params.b = zeros(l.params.b);
  }
  z.readout = readout.zeros_like();
  return z;
}

std::vector<ParamRef> parameters(Model& model) {
  std::vector<ParamRef> out;
  out.push_back({"cnn.kernels", model.cnn.kernels, ParamKind::weight});
  out.push_back({"cnn.bias", model.cnn.bias, ParamKind::bias});
  out.push_back({"cnn.ln_gain", model.cnn.ln_gain, ParamKind::weight});
  out.push_back({"cnn.ln_bias", model.cnn.ln_bias, ParamKind::bias});
  for (std::size_t li = 0; li < model.topology.layers.size(); ++li) {
    auto& l = model.topology.layers[li];
    const std::string p = "layer" + std::to_string(li) + ".";
    if (!l.nerve) {
      out.push_back({p + "W", l.W.data(), ParamKind::weight, l.W_mask.data()});
      out.push_back({p + "V", l.V.data(), ParamKind::weight, l.V_mask.data()});
    }
    out.push_back({p + "tau_u", l.params.tau_u, ParamKind::neuron});
    if (!l.nerve) {
      out.push_back({p + "tau_w", l.params.tau_w, ParamKind::neuron, l.sfa_mask});
      out.push_back({p + "a", l.params.a, ParamKind::neuron, l.sfa_mask});
      out.push_back({p + "b", l.params.b, ParamKind::neuron, l.sfa_mask});
    }
  }
  auto& r = model.readout;
  out.push_back({"readout.W1", r.W1.data(), ParamKind::weight});
  out.push_back({"readout.b1", r.b1, ParamKind::bias});
  out.push_back({"readout.W2", r.W2.data(), ParamKind::weight});
  out.push_back({"readout.b2", r.b2, ParamKind::bias});
  out.push_back({"readout.W3", r.W3.data(), ParamKind::weight});
  out.push_back({"readout.b3", r.b3, ParamKind::bias});
  return out;
}

ForwardPass forward(const Model& model, const MatrixD& features, const std::vector<int>* target,
                    const PassOptions& options) {
  ForwardPass pass;
  frontend::CnnOptions cnn_opts = model.config.cnn;
  cnn_opts.training = options.training;
  pass.currents = frontend::auditory_cnn(features, model.cnn, cnn_opts, options.dropout_rng,
                                         &pass.cnn);
  const double dt = model.topology.dt_ms;
  const std::size_t T = features.rows();
  pass.duration_s = static_cast<double>(T) * dt / 1000.0;

  const MatrixD* input = &pass.currents;
  pass.layers.reserve(model.topology.layers.size());
  for (std::size_t li = 0; li < model.topology.layers.size(); ++li) {
    pass.layers.push_back(
        net::run_layer(model.topology.layers[li], *input, dt, options.spike, li));
    input = &pass.layers.back().s;
  }
  for (const auto& tr : pass.layers) {
    std::vector<double> rates(tr.s.cols(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const auto s = tr.s.row(t);
      for (std::size_t i = 0; i < rates.size(); ++i) rates[i] += s[i];
    }
    for (auto& r : rates) r /= pass.duration_s;
    pass.rates_hz.push_back(std::move(rates));
  }
  pass.logprobs = readout_forward(pass.layers.back().s, model.readout, &pass.readout);

  if (target != nullptr) {
    pass.ctc = ctc_loss(pass.logprobs, *target, false).loss;
    FiringRateStats stats;
    stats.rates.push_back(pass.rates_hz);
    stats.durations_s.push_back(pass.duration_s);
    pass.reg = regularization_loss(stats, model.config.f_min_hz, model.config.effective_f_max());
    pass.total = pass.ctc + model.config.reg_weight * pass.reg;
  }
  return pass;
}

void backward(const Model& model, const MatrixD& features, const std::vector<int>& target,
              const ForwardPass& pass, const PassOptions& options, double scale, Model& grad) {
  const auto& layers = model.topology.layers;
  const std::size_t L = layers.size();
  const std::size_t T = features.rows();
  const double dt = model.topology.dt_ms;

  CtcResult ctc = ctc_loss(pass.logprobs, target, true);
  for (auto& g : ctc.grad.data()) g *= scale;
  MatrixD grad_s =
      readout_backward(pass.layers.back().s, model.readout, pass.readout, ctc.grad, grad.readout);

  const double f_min = model.config.f_min_hz;
  const double f_max = model.config.effective_f_max();
  for (std::size_t li = L; li-- > 0;) {
    const auto& layer = layers[li];
    // Firing-rate penalty: d reg / d s_t = hinge'(f) / (L * N * duration).
    const double reg_scale = scale * model.config.reg_weight /
                             (static_cast<double>(L) * static_cast<double>(layer.n) *
                              pass.duration_s);
    for (std::size_t i = 0; i < layer.n; ++i) {
      const double g = reg_scale * regularization_rate_gradient(pass.rates_hz[li][i], f_min, f_max);
      if (g == 0.0) continue;
      for (std::size_t t = 0; t < T; ++t) grad_s(t, i) += g;
    }
    const MatrixD& input = li == 0 ? pass.currents : pass.layers[li - 1].s;
    grad_s = layer_backward(layer, input, pass.layers[li], grad_s, dt, options.spike,
                            model.config.reset_gradient, grad.topology.layers[li]);
  }
  frontend::CnnOptions cnn_opts = model.config.cnn;
  cnn_opts.training = options.training;
  frontend::auditory_cnn_backward(features, model.cnn, cnn_opts, pass.cnn, grad_s, grad.cnn);
}

}  // namespace spikeosc::train
