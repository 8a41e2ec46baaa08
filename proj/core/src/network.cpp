#include "spikeosc/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "spikeosc/errors.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::net {

namespace {

enum SeedTag : std::uint64_t { kTagW = 1, kTagV, kTagWMask, kTagVMask, kTagSfa, kTagDale, kTagParams };

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// Chooses round(fraction * n) distinct indices out of [0, n).
std::vector<std::uint8_t> choose_subset(std::size_t n, double fraction, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::uint8_t> chosen(n, 0);
  for (std::size_t i = 0; i < k; ++i) chosen[idx[i]] = 1;
  return chosen;
}

void init_uniform(MatrixD& m, double bound, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : m.data()) v = dist(rng);
}

void apply_mask(MatrixD& m, const Matrix<std::uint8_t>& mask) {
  auto& d = m.data();
  const auto& k = mask.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!k[i]) d[i] = 0.0;
  }
}

}  // namespace

void LayerSpec::validate() const {
  if (n_neurons == 0) throw Error(Errc::invalid_parameter, "layer must have at least one neuron");
  if (!in_unit(sfa_fraction) || !in_unit(ff_connectivity) || !in_unit(rec_connectivity) ||
      !in_unit(excitatory_fraction)) {
    throw Error(Errc::invalid_parameter, "layer fractions must lie in [0, 1]");
  }
  if (!(init_rate_hz > 0.0) || !std::isfinite(init_rate_hz)) {
    throw Error(Errc::invalid_parameter, "init_rate_hz must be positive");
  }
}

double init_bound(const LayerSpec& spec, double fan_in, double dt_ms, double share) {
  fan_in = std::max(fan_in, 1.0);
  if (spec.init == WeightInit::fan_in) return 1.0 / std::sqrt(fan_in);
  // Var(I) = fan_in * p * k^2 / 3 for presynaptic spike probability p per step.
  const double p = std::min(1.0, spec.init_rate_hz * dt_ms / 1000.0);
  return std::sqrt(3.0 * share / (fan_in * p));
}

void NeuronParams::resize(std::size_t n) {
  tau_u.resize(n);
  tau_w.resize(n);
  a.resize(n);
  b.resize(n);
}

neuron::AdLIFParameters Layer::effective_params(std::size_t i) const {
  const bool sfa = !sfa_mask.empty() && sfa_mask[i];
  return {params.tau_u[i], params.tau_w[i], sfa ? params.a[i] : 0.0, sfa ? params.b[i] : 0.0};
}

std::vector<std::size_t> NetworkTopology::layer_sizes() const {
  std::vector<std::size_t> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.n);
  return out;
}

void NetworkTopology::enforce_constraints() {
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto& layer = layers[li];
    auto& p = layer.params;
    for (std::size_t i = 0; i < layer.n; ++i) {
      if (layer.nerve) {
        p.tau_u[i] = std::clamp(p.tau_u[i], neuron::kTauURange.lo, neuron::kTauURange.hi);
        continue;
      }
      const auto c = neuron::clamp_parameters({p.tau_u[i], p.tau_w[i], p.a[i], p.b[i]},
                                              strict_stability);
      p.tau_u[i] = c.tau_u;
      p.tau_w[i] = c.tau_w;
      p.a[i] = c.a;
      p.b[i] = c.b;
    }
    if (layer.nerve) continue;
    apply_mask(layer.W, layer.W_mask);
    apply_mask(layer.V, layer.V_mask);
    for (std::size_t i = 0; i < layer.n; ++i) layer.V(i, i) = 0.0;
    if (dale_enabled) {
      apply_dale_inplace(layer.W, layers[li - 1].dale_signs);
      apply_dale_inplace(layer.V, layer.dale_signs);
    }
  }
}

Matrix<std::uint8_t> build_masks(std::size_t rows, std::size_t cols, double connectivity,
                                 std::uint64_t seed, bool recurrent) {
  if (!in_unit(connectivity)) {
    throw Error(Errc::invalid_parameter, "connectivity must lie in [0, 1]");
  }
  std::vector<std::size_t> eligible;
  eligible.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(recurrent && r == c)) eligible.push_back(r * cols + c);
    }
  }
  const auto chosen = choose_subset(eligible.size(), connectivity, seed);
  Matrix<std::uint8_t> mask(rows, cols, 0);
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (chosen[i]) mask.data()[eligible[i]] = 1;
  }
  return mask;
}

void apply_dale_inplace(MatrixD& weights, std::span<const std::int8_t> signs) {
  if (signs.size() != weights.rows()) {
    throw Error(Errc::shape_mismatch, "Dale signs must cover every presynaptic row");
  }
  for (std::size_t j = 0; j < weights.rows(); ++j) {
    for (auto& v : weights.row(j)) {
      if (v == 0.0) {
        v = 0.0;  // normalises -0.0
      } else {
        v = signs[j] > 0 ? std::abs(v) : -std::abs(v);
      }
    }
  }
}

MatrixD apply_dale(const MatrixD& weights, std::span<const std::int8_t> signs) {
  MatrixD out = weights;
  apply_dale_inplace(out, signs);
  return out;
}

std::vector<double> layer_stimulus(const MatrixD& W, const MatrixD& V,
                                   std::span<const double> s_prev_layer,
                                   std::span<const double> s_same_layer_prev) {
  if (W.rows() != s_prev_layer.size() || V.rows() != s_same_layer_prev.size() ||
      V.cols() != W.cols() || V.rows() != V.cols()) {
    throw Error(Errc::shape_mismatch, "layer_stimulus: W, V and spike vectors disagree");
  }
  std::vector<double> I(W.cols(), 0.0);
  for (std::size_t j = 0; j < W.rows(); ++j) {
    const double x = s_prev_layer[j];
    if (x == 0.0) continue;
    const auto row = W.row(j);
    for (std::size_t k = 0; k < I.size(); ++k) I[k] += x * row[k];
  }
  for (std::size_t j = 0; j < V.rows(); ++j) {
    const double x = s_same_layer_prev[j];
    if (x == 0.0) continue;
    const auto row = V.row(j);
    for (std::size_t k = 0; k < I.size(); ++k) I[k] += x * row[k];
  }
  return I;
}

NetworkTopology build_topology(std::size_t n_fibers, std::span<const LayerSpec> specs,
                               double dt_ms, std::uint64_t seed) {
  if (n_fibers == 0) throw Error(Errc::invalid_parameter, "need at least one nerve fiber");
  if (!(dt_ms > 0.0)) throw Error(Errc::invalid_timestep, "dt must be positive");
  NetworkTopology topo;
  topo.dt_ms = dt_ms;
  topo.dale_enabled = std::any_of(specs.begin(), specs.end(),
                                  [](const LayerSpec& s) { return s.dale_enabled; });

  Layer nerve;
  nerve.nerve = true;
  nerve.n = n_fibers;
  nerve.sfa_mask.assign(n_fibers, 0);
  nerve.params.resize(n_fibers);
  {
    std::mt19937_64 rng(derive_seed(seed, {0, kTagParams}));
    std::uniform_real_distribution<double> tau_u(neuron::kTauURange.lo, neuron::kTauURange.hi);
    for (std::size_t i = 0; i < n_fibers; ++i) {
      nerve.params.tau_u[i] = tau_u(rng);
      nerve.params.tau_w[i] = neuron::kTauWRange.lo;
      nerve.params.a[i] = 0.0;
      nerve.params.b[i] = 0.0;
    }
  }
  if (topo.dale_enabled) nerve.dale_signs.assign(n_fibers, 1);  // nerve fibers are excitatory
  topo.layers.push_back(std::move(nerve));

  for (std::size_t li = 0; li < specs.size(); ++li) {
    const auto& spec = specs[li];
    spec.validate();
    const std::uint64_t l = li + 1;
    Layer layer;
    layer.n_in = topo.layers.back().n;
    layer.n = spec.n_neurons;

    layer.W = MatrixD(layer.n_in, layer.n);
    layer.V = MatrixD(layer.n, layer.n);
    const double ff_fan = spec.init == WeightInit::fan_in
                              ? static_cast<double>(layer.n_in)
                              : spec.ff_connectivity * static_cast<double>(layer.n_in);
    const double rec_fan = spec.init == WeightInit::fan_in
                               ? static_cast<double>(layer.n)
                               : spec.rec_connectivity * static_cast<double>(layer.n - 1);
    const double rec_share = spec.rec_connectivity > 0.0 ? 0.25 : 0.0;
    init_uniform(layer.W, init_bound(spec, ff_fan, dt_ms, 1.0 - rec_share),
                 derive_seed(seed, {l, kTagW}));
    init_uniform(layer.V, init_bound(spec, rec_fan, dt_ms, 0.25),
                 derive_seed(seed, {l, kTagV}));
    layer.W_mask = build_masks(layer.n_in, layer.n, spec.ff_connectivity,
                               derive_seed(seed, {l, kTagWMask}), false);
    layer.V_mask = build_masks(layer.n, layer.n, spec.rec_connectivity,
                               derive_seed(seed, {l, kTagVMask}), true);
    layer.sfa_mask = choose_subset(layer.n, spec.sfa_fraction, derive_seed(seed, {l, kTagSfa}));
    if (topo.dale_enabled) {
      const auto exc = choose_subset(layer.n, spec.dale_enabled ? spec.excitatory_fraction : 1.0,
                                     derive_seed(seed, {l, kTagDale}));
      layer.dale_signs.resize(layer.n);
      for (std::size_t i = 0; i < layer.n; ++i) layer.dale_signs[i] = exc[i] ? 1 : -1;
    }

    layer.params.resize(layer.n);
    std::mt19937_64 rng(derive_seed(seed, {l, kTagParams}));
    std::uniform_real_distribution<double> tau_u(neuron::kTauURange.lo, neuron::kTauURange.hi);
    std::uniform_real_distribution<double> tau_w(neuron::kTauWRange.lo, neuron::kTauWRange.hi);
    std::uniform_real_distribution<double> a(neuron::kARange.lo, neuron::kARange.hi);
    std::uniform_real_distribution<double> b(neuron::kBRange.lo, neuron::kBRange.hi);
    for (std::size_t i = 0; i < layer.n; ++i) {
      layer.params.tau_u[i] = tau_u(rng);
      layer.params.tau_w[i] = tau_w(rng);
      layer.params.a[i] = a(rng);
      layer.params.b[i] = b(rng);
    }
    topo.layers.push_back(std::move(layer));
  }
  topo.enforce_constraints();
  return topo;
}

double spike_value(SpikeFunction f, double u) noexcept {
  if (f == SpikeFunction::heaviside) return u >= neuron::kThreshold ? 1.0 : 0.0;
  return std::clamp(0.5 * (u - 0.5), 0.0, 1.0);
}

double spike_derivative(SpikeFunction f, double u) noexcept {
  if (f == SpikeFunction::heaviside) {
    // boxcar surrogate
    return std::abs(u - neuron::kThreshold) <= 0.5 ? 0.5 : 0.0;
  }
  return (u > 0.5 && u < 2.5) ? 0.5 : 0.0;
}

LayerTrace run_layer(const Layer& layer, const MatrixD& input, double dt_ms, SpikeFunction f,
                     std::size_t layer_index) {
  const std::size_t T = input.rows();
  const std::size_t n = layer.n;
  const std::size_t expected_cols = layer.nerve ? n : layer.n_in;
  if (input.cols() != expected_cols) {
    throw Error(Errc::shape_mismatch, "layer " + std::to_string(layer_index) + " expects " +
                                          std::to_string(expected_cols) + " inputs, got " +
                                          std::to_string(input.cols()));
  }
  std::vector<double> alpha(n), beta(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = layer.effective_params(i);
    const auto d = neuron::decay_factors(p, dt_ms);
    alpha[i] = d.alpha;
    beta[i] = d.beta;
    a[i] = p.a;
    b[i] = p.b;
  }

  LayerTrace tr{MatrixD(T, n), MatrixD(T, n), MatrixD(T, n), MatrixD(T, n)};
  std::vector<double> u_prev(n, 0.0), w_prev(n, 0.0), s_prev(n, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    auto I = tr.I.row(t);
    if (layer.nerve) {
      const auto x = input.row(t);
      std::copy(x.begin(), x.end(), I.begin());
    } else {
      const auto x = input.row(t);
      for (std::size_t j = 0; j < layer.n_in; ++j) {
        if (x[j] == 0.0) continue;
        const auto row = layer.W.row(j);
        for (std::size_t k = 0; k < n; ++k) I[k] += x[j] * row[k];
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (s_prev[j] == 0.0) continue;
        const auto row = layer.V.row(j);
        for (std::size_t k = 0; k < n; ++k) I[k] += s_prev[j] * row[k];
      }
    }
    auto u = tr.u.row(t);
    auto w = tr.w.row(t);
    auto s = tr.s.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(I[i])) {
        throw Error(Errc::numeric_overflow, "non-finite stimulus in layer " +
                                                std::to_string(layer_index) + " at step " +
                                                std::to_string(t));
      }
      u[i] = alpha[i] * (u_prev[i] - s_prev[i]) + (1.0 - alpha[i]) * (I[i] - w_prev[i]);
      w[i] = beta[i] * (w_prev[i] + b[i] * s_prev[i]) + (1.0 - beta[i]) * a[i] * u_prev[i];
      s[i] = spike_value(f, u[i]);
    }
    std::copy(u.begin(), u.end(), u_prev.begin());
    std::copy(w.begin(), w.end(), w_prev.begin());
    std::copy(s.begin(), s.end(), s_prev.begin());
  }
  return tr;
}

std::vector<SpikeTensor> simulate_network(const Tensor3& input_currents,
                                          const NetworkTopology& topology) {
  if (topology.layers.empty()) throw Error(Errc::invalid_parameter, "empty topology");
  if (input_currents.features != topology.n_fibers()) {
    throw Error(Errc::shape_mismatch, "input currents do not match the number of nerve fibers");
  }
  const std::size_t B = input_currents.batch;
  const std::size_t T = input_currents.time;
  std::vector<SpikeTensor> out;
  for (const auto& l : topology.layers) out.emplace_back(B, T, l.n, topology.dt_ms);

  for (std::size_t b = 0; b < B; ++b) {
    MatrixD x(T, input_currents.features);
    std::copy_n(input_currents.values.begin() + static_cast<std::ptrdiff_t>(b * T * x.cols()),
                x.size(), x.data().begin());
    for (std::size_t li = 0; li < topology.layers.size(); ++li) {
      auto tr = run_layer(topology.layers[li], x, topology.dt_ms, SpikeFunction::heaviside, li);
      auto& dst = out[li];
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < dst.neurons; ++i) {
          dst.at(b, t, i) = tr.s(t, i) != 0.0 ? 1 : 0;
        }
      }
      x = std::move(tr.s);
    }
  }
  return out;
}

}  // namespace spikeosc::net
