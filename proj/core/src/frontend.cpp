#include "spikeosc/frontend.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "spikeosc/errors.hpp"
#include "spikeosc/fft.hpp"

namespace spikeosc::frontend {

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_centers(std::size_t n_mels, double sample_rate) {
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> c(n_mels);
  for (std::size_t m = 0; m < n_mels; ++m) {
    c[m] = mel_to_hz(mel_max * static_cast<double>(m + 1) / static_cast<double>(n_mels + 1));
  }
  return c;
}

MatrixD mel_filterbank(std::size_t n_mels, std::size_t n_fft, double sample_rate) {
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  MatrixD fb(n_mels, n_bins);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = sample_rate * static_cast<double>(k) / static_cast<double>(n_fft);
      double v = 0.0;
      if (f > lo && f <= mid) {
        v = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        v = (hi - f) / (hi - mid);
      }
      fb(m, k) = v;
    }
  }
  return fb;
}

MelFeatures mel_features(const Waveform& wav, const MelOptions& options) {
  if (options.hop_ms != 1.0 && options.hop_ms != 2.0 && options.hop_ms != 5.0) {
    throw Error(Errc::invalid_parameter, "hop_ms must be one of 1, 2, 5");
  }
  const auto win = static_cast<std::size_t>(std::lround(options.win_ms * wav.sample_rate / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(options.hop_ms * wav.sample_rate / 1000.0));
  const std::size_t n = wav.samples.size();
  if (n < win || win == 0) {
    throw Error(Errc::too_short, "waveform of " + std::to_string(n) +
                                     " samples is shorter than one analysis window (" +
                                     std::to_string(win) + ")");
  }
  const std::size_t frames = (n - win) / hop + 1;
  const std::size_t n_fft = dsp::next_pow2(win);
  const MatrixD fb = mel_filterbank(options.n_mels, n_fft, wav.sample_rate);

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(win));
  }

  MelFeatures out{MatrixD(frames, options.n_mels), 1000.0 / options.hop_ms};
  std::vector<double> frame(n_fft);
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) frame[i] = wav.samples[t * hop + i] * window[i];
    const auto spec = dsp::fft_real(frame);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spec[k]);
    for (std::size_t m = 0; m < options.n_mels; ++m) {
      double e = 0.0;
      const auto row = fb.row(m);
      for (std::size_t k = 0; k < mag.size(); ++k) e += row[k] * mag[k];
      out.values(t, m) = std::log(e + options.log_epsilon);
    }
  }
  return out;
}

void write_features_csv(const std::filesystem::path& path, const MelFeatures& features) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "cannot write " + path.string());
  os.precision(9);
  os << "frame";
  for (std::size_t m = 0; m < features.values.cols(); ++m) os << ",mel" << m;
  os << '\n';
  for (std::size_t t = 0; t < features.values.rows(); ++t) {
    os << t;
    for (double v : features.values.row(t)) os << ',' << v;
    os << '\n';
  }
}

AuditoryCnn AuditoryCnn::initialise(std::size_t channels, std::size_t n_mels, std::uint64_t seed) {
  if (n_mels < kCnnKernel) {
    throw Error(Errc::invalid_parameter, "need at least 7 mel bins for the auditory CNN");
  }
  AuditoryCnn cnn;
  cnn.channels = channels;
  cnn.n_mels = n_mels;
  cnn.kernels.resize(channels * kCnnKernel * kCnnKernel);
  cnn.bias.resize(channels);
  const double bound = 1.0 / static_cast<double>(kCnnKernel);  // 1/sqrt(fan_in = 49)
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& k : cnn.kernels) k = dist(rng);
  for (auto& b : cnn.bias) b = dist(rng);
  cnn.ln_gain.assign(cnn.n_fibers(), 1.0);
  cnn.ln_bias.assign(cnn.n_fibers(), 0.0);
  return cnn;
}

namespace {

constexpr std::ptrdiff_t kHalf = static_cast<std::ptrdiff_t>(kCnnKernel / 2);

MatrixD convolve_features(const MatrixD& x, const AuditoryCnn& cnn) {
  const std::size_t T = x.rows();
  const std::size_t F = cnn.bands();
  MatrixD out(T, cnn.n_fibers());
  for (std::size_t t = 0; t < T; ++t) {
    auto y = out.row(t);
    for (std::size_t c = 0; c < cnn.channels; ++c) {
      for (std::size_t f = 0; f < F; ++f) y[c * F + f] = cnn.bias[c];
    }
    for (std::size_t i = 0; i < kCnnKernel; ++i) {
      const auto ts = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(i) - kHalf;
      if (ts < 0 || ts >= static_cast<std::ptrdiff_t>(T)) continue;
      const auto xr = x.row(static_cast<std::size_t>(ts));
      for (std::size_t c = 0; c < cnn.channels; ++c) {
        const double* k = &cnn.kernels[(c * kCnnKernel + i) * kCnnKernel];
        double* yc = &y[c * F];
        for (std::size_t j = 0; j < kCnnKernel; ++j) {
          const double kv = k[j];
          for (std::size_t f = 0; f < F; ++f) yc[f] += kv * xr[f + j];
        }
      }
    }
  }
  return out;
}

}  // namespace

MatrixD auditory_cnn(const MatrixD& features, const AuditoryCnn& cnn, const CnnOptions& options,
                     std::mt19937_64* dropout_rng, CnnTrace* trace) {
  if (features.rows() == 0) throw Error(Errc::too_short, "auditory CNN needs at least one frame");
  if (features.cols() != cnn.n_mels) {
    throw Error(Errc::shape_mismatch, "feature width " + std::to_string(features.cols()) +
                                          " does not match CNN input " +
                                          std::to_string(cnn.n_mels));
  }
  const std::size_t T = features.rows();
  const std::size_t D = cnn.n_fibers();
  const std::size_t F = cnn.bands();

  MatrixD conv = convolve_features(features, cnn);
  MatrixD normalised(T, D);
  std::vector<double> inv_std(T, 1.0);
  MatrixD y(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    const auto c = conv.row(t);
    auto nrm = normalised.row(t);
    auto yr = y.row(t);
    if (!options.layer_norm) {
      std::copy(c.begin(), c.end(), nrm.begin());
      std::copy(c.begin(), c.end(), yr.begin());
      continue;
    }
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(D);
    double var = 0.0;
    for (double v : c) var += (v - mean) * (v - mean);
    var /= static_cast<double>(D);
    inv_std[t] = 1.0 / std::sqrt(var + options.norm_epsilon);
    for (std::size_t d = 0; d < D; ++d) {
      nrm[d] = (c[d] - mean) * inv_std[t];
      yr[d] = cnn.ln_gain[d] * nrm[d] + cnn.ln_bias[d];
    }
  }

  std::vector<double> scale(cnn.channels, 1.0);
  if (options.training && options.dropout > 0.0 && dropout_rng != nullptr) {
    std::bernoulli_distribution drop(options.dropout);
    for (auto& s : scale) s = drop(*dropout_rng) ? 0.0 : 1.0 / (1.0 - options.dropout);
  }

  MatrixD pre(T, D);
  MatrixD out(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < cnn.channels; ++c) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t d = c * F + f;
        const double z = y(t, d) * scale[c];
        pre(t, d) = z;
        out(t, d) = z > 0.0 ? z : options.leaky_slope * z;
      }
    }
  }
  if (trace != nullptr) {
    trace->conv = std::move(conv);
    trace->normalised = std::move(normalised);
    trace->inv_std = std::move(inv_std);
    trace->channel_scale = std::move(scale);
    trace->pre_activation = std::move(pre);
  }
  return out;
}

void auditory_cnn_backward(const MatrixD& features, const AuditoryCnn& cnn,
                           const CnnOptions& options, const CnnTrace& trace,
                           const MatrixD& grad_output, AuditoryCnn& grad) {
  const std::size_t T = features.rows();
  const std::size_t D = cnn.n_fibers();
  const std::size_t F = cnn.bands();
  MatrixD dconv(T, D);
  std::vector<double> dy(D), dn(D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < cnn.channels; ++c) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t d = c * F + f;
        const double z = trace.pre_activation(t, d);
        const double dz = grad_output(t, d) * (z > 0.0 ? 1.0 : options.leaky_slope);
        dy[d] = dz * trace.channel_scale[c];
      }
    }
    auto dc = dconv.row(t);
    if (!options.layer_norm) {
      std::copy(dy.begin(), dy.end(), dc.begin());
      continue;
    }
    const auto nrm = trace.normalised.row(t);
    double mean_dn = 0.0, mean_dn_n = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      grad.ln_gain[d] += dy[d] * nrm[d];
      grad.ln_bias[d] += dy[d];
      dn[d] = dy[d] * cnn.ln_gain[d];
      mean_dn += dn[d];
      mean_dn_n += dn[d] * nrm[d];
    }
    mean_dn /= static_cast<double>(D);
    mean_dn_n /= static_cast<double>(D);
    for (std::size_t d = 0; d < D; ++d) {
      dc[d] = trace.inv_std[t] * (dn[d] - mean_dn - nrm[d] * mean_dn_n);
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto dc = dconv.row(t);
    for (std::size_t c = 0; c < cnn.channels; ++c) {
      double s = 0.0;
      for (std::size_t f = 0; f < F; ++f) s += dc[c * F + f];
      grad.bias[c] += s;
    }
    for (std::size_t i = 0; i < kCnnKernel; ++i) {
      const auto ts = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(i) - kHalf;
      if (ts < 0 || ts >= static_cast<std::ptrdiff_t>(T)) continue;
      const auto xr = features.row(static_cast<std::size_t>(ts));
      for (std::size_t c = 0; c < cnn.channels; ++c) {
        double* gk = &grad.kernels[(c * kCnnKernel + i) * kCnnKernel];
        const double* dcc = &dc[c * F];
        for (std::size_t j = 0; j < kCnnKernel; ++j) {
          double s = 0.0;
          for (std::size_t f = 0; f < F; ++f) s += dcc[f] * xr[f + j];
          gk[j] += s;
        }
      }
    }
  }
}

}  // namespace spikeosc::frontend
