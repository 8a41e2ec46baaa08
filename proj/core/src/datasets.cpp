#include "spikeosc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "spikeosc/errors.hpp"
#include "spikeosc/fft.hpp"
#include "spikeosc/filters.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRate = 16000.0;

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }
double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit(rng);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Adds an amplitude-modulated tone with slight vibrato and 10 ms raised-cosine ramps.
void add_tone(std::vector<double>& x, double start_s, double dur_s, double freq, double amp,
              double am_rate, double am_depth, std::mt19937_64& rng) {
  const auto begin = static_cast<std::size_t>(start_s * kRate);
  const auto n = static_cast<std::size_t>(dur_s * kRate);
  const double ramp = 0.01 * kRate;
  const double phase0 = uniform(rng, 0.0, kTwoPi);
  const double am_phase = uniform(rng, 0.0, kTwoPi);
  const double vib = uniform(rng, 4.0, 6.0);
  double phase = phase0;
  for (std::size_t i = 0; i < n && begin + i < x.size(); ++i) {
    const double t = static_cast<double>(i) / kRate;
    const double f = freq * (1.0 + 0.015 * std::sin(kTwoPi * vib * t));
    phase += kTwoPi * f / kRate;
    double env = 1.0 - am_depth * 0.5 * (1.0 + std::cos(kTwoPi * am_rate * t + am_phase));
    const double di = static_cast<double>(i);
    const double dn = static_cast<double>(n - 1 - i);
    if (di < ramp) env *= 0.5 * (1.0 - std::cos(std::numbers::pi * di / ramp));
    if (dn < ramp) env *= 0.5 * (1.0 - std::cos(std::numbers::pi * dn / ramp));
    x[begin + i] += amp * env * std::sin(phase);
  }
}

void add_noise(std::vector<double>& x, double level, std::mt19937_64& rng) {
  for (auto& v : x) v += level * gaussian(rng);
}

std::string make_id(const char* prefix, const char* split, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%s-%04zu", prefix, split, i);
  return buf;
}

template <class Gen>
void fill_splits(AudioDataset& ds, std::uint64_t seed, const SplitSizes& sizes, std::uint64_t kind,
                 const char* prefix, Gen&& gen) {
  const struct {
    const char* name;
    std::size_t n;
    std::vector<Utterance>* out;
  } splits[] = {{"train", sizes.train, &ds.train}, {"val", sizes.val, &ds.val},
                {"test", sizes.test, &ds.test}};
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < splits[s].n; ++i) {
      std::mt19937_64 rng(derive_seed(seed, {kind, s, i}));
      Utterance u = gen(i, rng);
      u.id = make_id(prefix, splits[s].name, i);
      splits[s].out->push_back(std::move(u));
    }
  }
}

}  // namespace

AudioDataset tone_sequences(std::uint64_t seed, const SplitSizes& sizes) {
  static constexpr double carriers[3] = {600.0, 1500.0, 3500.0};
  AudioDataset ds;
  ds.kind = "tone-sequences";
  ds.n_outputs = 4;
  fill_splits(ds, seed, sizes, 11, "tones", [](std::size_t, std::mt19937_64& rng) {
    Utterance u;
    const auto len = 2 + static_cast<std::size_t>(unit(rng) * 4.0);
    std::vector<double> starts, durs;
    double t = uniform(rng, 0.05, 0.15);
    for (std::size_t k = 0; k < len; ++k) {
      u.target.push_back(1 + static_cast<int>(unit(rng) * 3.0));
      starts.push_back(t);
      durs.push_back(uniform(rng, 0.15, 0.25));
      t += durs.back() + uniform(rng, 0.06, 0.12);
    }
    const double total = std::max(1.0, t + 0.05);
    u.wav.samples.assign(static_cast<std::size_t>(total * kRate), 0.0);
    for (std::size_t k = 0; k < len; ++k) {
      const double f = carriers[u.target[k] - 1] * uniform(rng, 0.96, 1.04);
      add_tone(u.wav.samples, starts[k], durs[k], f, uniform(rng, 0.3, 0.6), uniform(rng, 4.0, 8.0),
               0.4, rng);
    }
    add_noise(u.wav.samples, 0.01, rng);
    return u;
  });
  return ds;
}

AudioDataset am_commands(std::uint64_t seed, const SplitSizes& sizes) {
  static constexpr double carriers[5] = {500.0, 900.0, 1600.0, 2800.0, 4500.0};
  static constexpr int pairs[5][2] = {{0, 1}, {2, 3}, {4, 0}, {1, 3}, {2, 4}};
  AudioDataset ds;
  ds.kind = "am-commands";
  ds.n_outputs = 11;
  fill_splits(ds, seed, sizes, 12, "cmd", [](std::size_t i, std::mt19937_64& rng) {
    Utterance u;
    const int cls = static_cast<int>(i % 10);
    const auto& pair = pairs[cls / 2];
    const int first = cls % 2 == 0 ? pair[0] : pair[1];
    const int second = cls % 2 == 0 ? pair[1] : pair[0];
    u.label = cls + 1;
    u.target = {u.label};
    u.wav.samples.assign(static_cast<std::size_t>(kRate), 0.0);
    const double onset = uniform(rng, 0.05, 0.15);
    const double d1 = uniform(rng, 0.25, 0.32);
    const double gap = uniform(rng, 0.10, 0.16);
    const double d2 = uniform(rng, 0.25, 0.32);
    const double am = uniform(rng, 6.0, 10.0);
    add_tone(u.wav.samples, onset, d1, carriers[first] * uniform(rng, 0.96, 1.04),
             uniform(rng, 0.3, 0.6), am, 0.5, rng);
    add_tone(u.wav.samples, onset + d1 + gap, d2, carriers[second] * uniform(rng, 0.96, 1.04),
             uniform(rng, 0.3, 0.6), am, 0.5, rng);
    add_noise(u.wav.samples, 0.01, rng);
    return u;
  });
  return ds;
}

io::SpikeExport pac_injected(std::uint64_t seed, const PacInjectedOptions& o) {
  if (o.n_layers == 0 || o.phase_layer >= o.n_layers || o.amp_layer >= o.n_layers) {
    throw Error(Errc::invalid_parameter, "coupled layers must exist");
  }
  if (o.depths.empty()) throw Error(Errc::invalid_parameter, "at least one depth is needed");
  const double fs = 1000.0 / o.dt_ms;
  if (!(o.gamma_hz < fs / 2.0)) throw Error(Errc::invalid_band, "gamma above Nyquist");
  const auto T = static_cast<std::size_t>(std::llround(o.duration_s * fs));
  const double dt_s = o.dt_ms / 1000.0;

  io::SpikeExport out;
  out.dt_ms = o.dt_ms;
  out.layer_sizes.assign(o.n_layers, o.neurons);
  static constexpr double background_hz[] = {10.0, 20.0, 11.0, 17.0, 9.0, 23.0};
  for (std::size_t u = 0; u < o.n_utterances; ++u) {
    const double depth = o.depths[u % o.depths.size()];
    char id[64];
    std::snprintf(id, sizeof id, "pac-d%.2f-%04zu", depth, u);
    out.utterance_ids.emplace_back(id);
    std::mt19937_64 rng(derive_seed(seed, {13, u}));

    // Slowly wandering theta and gamma phases shared by the coupled layers.
    std::vector<double> theta(T), gamma(T);
    double th = uniform(rng, 0.0, kTwoPi), ga = uniform(rng, 0.0, kTwoPi);
    const double wander = uniform(rng, 0.0, kTwoPi);
    for (std::size_t t = 0; t < T; ++t) {
      const double time = static_cast<double>(t) * dt_s;
      th += kTwoPi * o.theta_hz * (1.0 + 0.08 * std::sin(kTwoPi * 0.1 * time + wander)) * dt_s;
      ga += kTwoPi * o.gamma_hz * (1.0 + 0.05 * std::sin(kTwoPi * 0.23 * time)) * dt_s;
      theta[t] = th;
      gamma[t] = ga;
    }
    std::vector<Matrix<std::uint8_t>> layers;
    for (std::size_t l = 0; l < o.n_layers; ++l) {
      std::vector<double> rate(T);
      if (l == o.phase_layer) {
        for (std::size_t t = 0; t < T; ++t) rate[t] = o.base_rate_hz * (1.0 + 0.8 * std::cos(theta[t]));
      } else if (l == o.amp_layer) {
        for (std::size_t t = 0; t < T; ++t) {
          const double env = 0.5 * (1.0 + depth * std::cos(theta[t]));
          rate[t] = o.base_rate_hz * (1.0 + env * std::cos(gamma[t]));
        }
      } else {
        const double f = background_hz[l % 6];
        const double ph = uniform(rng, 0.0, kTwoPi);
        for (std::size_t t = 0; t < T; ++t) {
          rate[t] = o.base_rate_hz * (1.0 + 0.5 * std::cos(kTwoPi * f * static_cast<double>(t) * dt_s + ph));
        }
      }
      Matrix<std::uint8_t> raster(T, o.neurons);
      for (std::size_t t = 0; t < T; ++t) {
        const double p = std::min(1.0, rate[t] * dt_s);
        auto row = raster.row(t);
        for (auto& s : row) s = unit(rng) < p ? 1 : 0;
      }
      layers.push_back(std::move(raster));
    }
    out.rasters.push_back(std::move(layers));
  }
  return out;
}

double pac_depth_from_id(const std::string& id) {
  double d = -1.0;
  if (std::sscanf(id.c_str(), "pac-d%lf-", &d) != 1) return -1.0;
  return d;
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "babble" || name == "babble-like") return NoiseKind::babble;
  if (name == "stationary") return NoiseKind::stationary;
  throw Error(Errc::invalid_parameter, "noise kind must be uniform, babble or stationary");
}

frontend::Waveform noise_input(NoiseKind kind, double duration_s, std::uint64_t seed,
                               double sample_rate) {
  if (!(duration_s > 0.0) || !(sample_rate > 0.0)) {
    throw Error(Errc::invalid_parameter, "noise needs a positive duration and sample rate");
  }
  frontend::Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(duration_s * sample_rate);
  w.samples.assign(n, 0.0);
  std::mt19937_64 rng(derive_seed(seed, {14, static_cast<std::uint64_t>(kind)}));
  switch (kind) {
    case NoiseKind::uniform:
      for (auto& v : w.samples) v = uniform(rng, -0.5, 0.5);
      break;
    case NoiseKind::babble: {
      for (int k = 0; k < 6; ++k) {
        const double f = uniform(rng, 200.0, std::min(3500.0, 0.45 * sample_rate));
        const double am = uniform(rng, 3.0, 8.0);
        const double ph = uniform(rng, 0.0, kTwoPi), aph = uniform(rng, 0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i) {
          const double t = static_cast<double>(i) / sample_rate;
          w.samples[i] += 0.5 * (1.0 + std::cos(kTwoPi * am * t + aph)) * std::sin(kTwoPi * f * t + ph);
        }
      }
      double peak = 0.0;
      for (double v : w.samples) peak = std::max(peak, std::abs(v));
      if (peak > 0.0) {
        for (auto& v : w.samples) v *= 0.5 / peak;
      }
      break;
    }
    case NoiseKind::stationary: {
      std::vector<double> white(n);
      for (auto& v : white) v = gaussian(rng);
      const double hi = std::min(3400.0, 0.45 * sample_rate);
      const auto taps = osc::design_bandpass({"speech", 300.0, hi}, sample_rate);
      const auto y = dsp::convolve(white, taps);
      const std::size_t delay = taps.size() / 2;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += y[i + delay] * y[i + delay];
      const double scale = ss > 0.0 ? 0.15 / std::sqrt(ss / static_cast<double>(n)) : 0.0;
      for (std::size_t i = 0; i < n; ++i) w.samples[i] = y[i + delay] * scale;
      break;
    }
  }
  return w;
}

std::vector<std::size_t> top_k_by_duration(const std::vector<double>& durations, std::size_t k) {
  std::vector<std::size_t> idx(durations.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k == 0 || k >= durations.size()) return idx;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return durations[a] > durations[b]; });
  idx.resize(k);
  return idx;
}

train::Example to_example(const Utterance& utt, double dt_ms, std::size_t n_mels) {
  frontend::MelOptions opts;
  opts.n_mels = n_mels;
  opts.hop_ms = dt_ms;
  train::Example ex;
  ex.id = utt.id;
  ex.features = frontend::mel_features(utt.wav, opts).values;
  ex.target = utt.target;
  ex.label = utt.label;
  return ex;
}

std::vector<train::Example> to_examples(const std::vector<Utterance>& utts, double dt_ms,
                                        std::size_t n_mels) {
  std::vector<train::Example> out;
  out.reserve(utts.size());
  for (const auto& u : utts) out.push_back(to_example(u, dt_ms, n_mels));
  return out;
}

}  // namespace spikeosc::data
