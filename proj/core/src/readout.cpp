#include "spikeosc/readout.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spikeosc/errors.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::train {

namespace {

void init_linear(MatrixD& W, std::vector<double>& b, std::size_t in, std::size_t out,
                 std::uint64_t seed) {
  W = MatrixD(in, out);
  b.assign(out, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : W.data()) v = dist(rng);
  for (auto& v : b) v = dist(rng);
}

// y = x W + b
MatrixD affine(const MatrixD& x, const MatrixD& W, const std::vector<double>& b) {
  MatrixD y(x.rows(), W.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto yr = y.row(r);
    std::copy(b.begin(), b.end(), yr.begin());
    const auto xr = x.row(r);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const auto wr = W.row(i);
      for (std::size_t j = 0; j < W.cols(); ++j) yr[j] += xi * wr[j];
    }
  }
  return y;
}

MatrixD leaky(const MatrixD& z, double slope) {
  MatrixD h = z;
  for (auto& v : h.data()) v = v > 0.0 ? v : slope * v;
  return h;
}

// Given dy for y = x W + b: accumulate dW, db and return dx.
MatrixD affine_backward(const MatrixD& x, const MatrixD& W, const MatrixD& dy, MatrixD& dW,
                        std::vector<double>& db) {
  MatrixD dx(x.rows(), W.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    const auto dyr = dy.row(r);
    for (std::size_t j = 0; j < dyr.size(); ++j) db[j] += dyr[j];
    auto dxr = dx.row(r);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      const auto wr = W.row(i);
      auto dwr = dW.row(i);
      double acc = 0.0;
      const double xi = xr[i];
      for (std::size_t j = 0; j < W.cols(); ++j) {
        acc += wr[j] * dyr[j];
        dwr[j] += xi * dyr[j];
      }
      dxr[i] = acc;
    }
  }
  return dx;
}

void leaky_backward(const MatrixD& z, MatrixD& grad, double slope) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z.data()[i] <= 0.0) grad.data()[i] *= slope;
  }
}

}  // namespace

std::size_t ReadoutConfig::pool_for_dt(double dt_ms) {
  const auto p = static_cast<long>(std::lround(40.0 / dt_ms));
  return static_cast<std::size_t>(std::max(1L, p));
}

Readout Readout::initialise(std::size_t n_in, const ReadoutConfig& config, std::uint64_t seed) {
  if (config.pool_factor == 0) throw Error(Errc::invalid_parameter, "pool factor must be >= 1");
  Readout r;
  r.config = config;
  r.n_in = n_in;
  init_linear(r.W1, r.b1, n_in, config.hidden, derive_seed(seed, {1}));
  init_linear(r.W2, r.b2, config.hidden, config.hidden, derive_seed(seed, {2}));
  init_linear(r.W3, r.b3, config.hidden, config.n_outputs, derive_seed(seed, {3}));
  return r;
}

Readout Readout::zeros_like() const {
  Readout z;
  z.config = config;
  z.n_in = n_in;
  z.W1 = MatrixD(W1.rows(), W1.cols());
  z.W2 = MatrixD(W2.rows(), W2.cols());
  z.W3 = MatrixD(W3.rows(), W3.cols());
  z.b1.assign(b1.size(), 0.0);
  z.b2.assign(b2.size(), 0.0);
  z.b3.assign(b3.size(), 0.0);
  return z;
}

std::size_t pooled_length(std::size_t T, std::size_t pool_factor) noexcept {
  return (T + pool_factor - 1) / pool_factor;
}

MatrixD average_pool(const MatrixD& x, std::size_t pool_factor) {
  const std::size_t Tp = pooled_length(x.rows(), pool_factor);
  MatrixD out(Tp, x.cols());
  const double inv = 1.0 / static_cast<double>(pool_factor);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto o = out.row(t / pool_factor);
    const auto xr = x.row(t);
    for (std::size_t j = 0; j < xr.size(); ++j) o[j] += xr[j] * inv;
  }
  return out;
}

void log_softmax_rows(MatrixD& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (auto& v : row) v -= lse;
  }
}

MatrixD readout_forward(const MatrixD& spikes, const Readout& readout, ReadoutTrace* trace) {
  if (spikes.cols() != readout.n_in) {
    throw Error(Errc::shape_mismatch, "readout input width does not match the last layer");
  }
  const double slope = readout.config.leaky_slope;
  MatrixD pooled = average_pool(spikes, readout.config.pool_factor);
  MatrixD z1 = affine(pooled, readout.W1, readout.b1);
  MatrixD h1 = leaky(z1, slope);
  MatrixD z2 = affine(h1, readout.W2, readout.b2);
  MatrixD h2 = leaky(z2, slope);
  MatrixD logprobs = affine(h2, readout.W3, readout.b3);
  log_softmax_rows(logprobs);
  if (trace != nullptr) {
    *trace = ReadoutTrace{std::move(pooled), std::move(z1), std::move(h1), std::move(z2),
                          std::move(h2), logprobs};
  }
  return logprobs;
}

MatrixD readout_backward(const MatrixD& spikes, const Readout& readout, const ReadoutTrace& trace,
                         const MatrixD& grad_logprobs, Readout& grad) {
  const double slope = readout.config.leaky_slope;
  // log-softmax: dz_k = g_k - p_k sum_j g_j
  MatrixD dlogits = grad_logprobs;
  for (std::size_t r = 0; r < dlogits.rows(); ++r) {
    auto g = dlogits.row(r);
    const auto lp = trace.logprobs.row(r);
    double sum = 0.0;
    for (double v : g) sum += v;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] -= std::exp(lp[k]) * sum;
  }
  MatrixD dh2 = affine_backward(trace.h2, readout.W3, dlogits, grad.W3, grad.b3);
  leaky_backward(trace.z2, dh2, slope);
  MatrixD dh1 = affine_backward(trace.h1, readout.W2, dh2, grad.W2, grad.b2);
  leaky_backward(trace.z1, dh1, slope);
  MatrixD dpooled = affine_backward(trace.pooled, readout.W1, dh1, grad.W1, grad.b1);

  const std::size_t P = readout.config.pool_factor;
  const double inv = 1.0 / static_cast<double>(P);
  MatrixD dspikes(spikes.rows(), spikes.cols());
  for (std::size_t t = 0; t < spikes.rows(); ++t) {
    const auto src = dpooled.row(t / P);
    auto dst = dspikes.row(t);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j] * inv;
  }
  return dspikes;
}

}  // namespace spikeosc::train
