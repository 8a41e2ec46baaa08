// Acceptance suite. Usage: spikeosc_acceptance [criterion...]; with no
// argument every criterion runs. Prints one PASS/FAIL line per criterion and
// exits non-zero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "spikeosc/checkpoint.hpp"
#include "spikeosc/config.hpp"
#include "spikeosc/ctc.hpp"
#include "spikeosc/datasets.hpp"
#include "spikeosc/experiment.hpp"
#include "spikeosc/filters.hpp"
#include "spikeosc/neuron.hpp"
#include "spikeosc/pac.hpp"
#include "spikeosc/population.hpp"
#include "spikeosc/random.hpp"
#include "spikeosc/readout.hpp"
#include "spikeosc/regularization.hpp"
#include "spikeosc/trainer.hpp"

using namespace spikeosc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t worker_threads() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

fs::path scratch(const std::string& name) {
  const auto p = fs::current_path() / ("acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------- 1

neuron::AdLIFParameters stable_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  neuron::AdLIFParameters p;
  p.tau_u = neuron::kTauURange.lo + (neuron::kTauURange.hi - neuron::kTauURange.lo) * U(rng);
  p.tau_w = neuron::kTauWRange.lo + (neuron::kTauWRange.hi - neuron::kTauWRange.lo) * U(rng);
  // Stay clear of the repeated-eigenvalue point so the kernel is defined.
  const double a_max =
      std::min(neuron::kARange.hi, 0.999 * neuron::stability_bounds(p.tau_u, p.tau_w).a_max_inclusive);
  p.a = neuron::kARange.lo + (a_max - neuron::kARange.lo) * U(rng);
  p.b = neuron::kBRange.hi * U(rng);
  return p;
}

// Max |u_discrete - u_analytic| on the grid of dt over [0, horizon].
double integrator_error(const neuron::AdLIFParameters& p, const std::vector<double>& times,
                        const std::vector<double>& weights, double dt, double horizon,
                        double* peak) {
  const auto k = neuron::kernel_coefficients(p);
  const auto f = neuron::decay_factors(p, dt);
  const auto steps = std::lround(horizon / dt);
  std::vector<double> drive(static_cast<std::size_t>(steps) + 1, 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    drive[static_cast<std::size_t>(std::lround(times[i] / dt))] += weights[i] / (1.0 - f.alpha);
  }
  neuron::NeuronState s{};
  double err = 0.0;
  for (long n = 1; n <= steps; ++n) {
    s = neuron::step_subthreshold(s, p, drive[static_cast<std::size_t>(n)], f);
    const double t = static_cast<double>(n) * dt;
    const double exact = neuron::analytic_response(k, times, weights, {}, t);
    err = std::max(err, std::abs(s.u - exact));
    if (peak) *peak = std::max(*peak, exact);
  }
  return err;
}

Outcome criterion_integrator() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_err = 0.0, lo_ratio = 1e9, hi_ratio = 0.0, peak = -1e9;
  for (int draw = 0; draw < 50; ++draw) {
    const auto p = stable_draw(rng);
    std::vector<double> times, weights;
    for (int i = 0; i < 8; ++i) {
      times.push_back(0.1 * static_cast<double>(10 + rng() % 800));  // on the 0.1 ms grid
      weights.push_back(-0.15 + 0.35 * U(rng));
    }
    const double e1 = integrator_error(p, times, weights, 0.1, 150.0, &peak);
    const double e2 = integrator_error(p, times, weights, 0.05, 150.0, nullptr);
    worst_err = std::max(worst_err, e1);
    lo_ratio = std::min(lo_ratio, e1 / e2);
    hi_ratio = std::max(hi_ratio, e1 / e2);
  }
  Outcome o;
  o.pass = worst_err < 1e-2 && lo_ratio >= 1.7 && hi_ratio <= 2.3 && peak < neuron::kThreshold;
  o.detail = "max error " + fmt("%.3g", worst_err) + ", halving ratio in [" + fmt("%.3f", lo_ratio) +
             ", " + fmt("%.3f", hi_ratio) + "], peak u " + fmt("%.3f", peak);
  return o;
}

// ---------------------------------------------------------------- 2

Outcome criterion_stability() {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_sum = 0.0, worst_prod = 0.0;
  std::size_t decayed = 0;
  for (int draw = 0; draw < 100; ++draw) {
    auto p = stable_draw(rng);
    const auto e = neuron::eigenvalues(p);
    const double want_sum = -(1.0 / p.tau_u + 1.0 / p.tau_w);
    const double want_prod = (1.0 + p.a) / (p.tau_u * p.tau_w);
    worst_sum = std::max(worst_sum, std::abs(e.lambda1 + e.lambda2 - want_sum) / std::abs(want_sum));
    worst_prod = std::max(worst_prod, std::abs(e.lambda1 * e.lambda2 - want_prod) / std::abs(want_prod));

    const double dt = 0.5;
    const auto f = neuron::decay_factors(p, dt);
    neuron::NeuronState s{2.0 * U(rng) - 1.0, 2.0 * U(rng) - 1.0, false};
    const double start = std::abs(s.u) + std::abs(s.w);
    for (long n = 0; n < std::lround(10.0 * p.tau_w / dt); ++n) s = neuron::step_subthreshold(s, p, 0.0, f);
    decayed += std::abs(s.u) + std::abs(s.w) < start;
  }
  std::size_t grew = 0;
  const std::vector<double> unstable_a{-1.2, -1.5, -2.0, -3.0, -4.5};
  for (double a : unstable_a) {
    const neuron::AdLIFParameters p{10.0, 100.0, a, 0.0};  // clamp bypassed on purpose
    const auto f = neuron::decay_factors(p, 0.5);
    neuron::NeuronState s{0.1, 0.1, false};
    const double start = std::abs(s.u) + std::abs(s.w);
    for (int n = 0; n < 4000; ++n) s = neuron::step_subthreshold(s, p, 0.0, f);
    grew += std::abs(s.u) + std::abs(s.w) > 10.0 * start && !neuron::is_stable(p);
  }
  Outcome o;
  o.pass = worst_sum <= 1e-12 && worst_prod <= 1e-12 && decayed == 100 && grew == unstable_a.size();
  o.detail = "eigen identities rel error " + fmt("%.2g", std::max(worst_sum, worst_prod)) + ", " +
             std::to_string(decayed) + "/100 decayed, " + std::to_string(grew) + "/" +
             std::to_string(unstable_a.size()) + " grew for a < -1";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome criterion_gradients() {
  double worst = 0.0;
  std::string worst_tensor;
  std::size_t tensors = 0, silent = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto model = oracles::toy_model(6, seed);
    const auto x = oracles::toy_features(20, 100 + seed);
    const auto r = oracles::gradient_check(model, x, {1, 2}, net::SpikeFunction::soft_ramp, 1e-4);
    tensors += r.tensors;
    silent += r.silent_tensors;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_tensor = r.worst_tensor;
    }
  }
  Outcome o;
  o.pass = worst < 1e-4 && silent == 0;
  o.detail = "max relative error " + fmt("%.3g", worst) + " (" + worst_tensor + ") over " +
             std::to_string(tensors) + " tensors, " + std::to_string(silent) + " with zero gradient";
  return o;
}

// ---------------------------------------------------------------- 4

Outcome criterion_ctc() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  std::size_t lattices = 0;
  // Cycle through every (T, alphabet) combination until 200 feasible lattices.
  for (std::size_t i = 0; lattices < 200; ++i) {
    const std::size_t T = 1 + i % 8;
    const std::size_t alphabet = 1 + (i / 8) % 4;
    const std::size_t K = alphabet + 1;
    std::vector<int> target;
    const std::size_t L = 1 + rng() % T;
    for (std::size_t j = 0; j < L; ++j) target.push_back(1 + static_cast<int>(rng() % alphabet));
    if (train::ctc_min_frames(target) > T) continue;
    MatrixD lp(T, K);
    for (auto& v : lp.data()) v = u(rng);
    train::log_softmax_rows(lp);
    worst = std::max(worst, std::abs(train::ctc_loss(lp, target, false).loss -
                                     oracles::ctc_brute_force(lp, target)));
    ++lattices;
  }
  Outcome o;
  o.pass = worst < 1e-6;
  o.detail = std::to_string(lattices) + " lattices, max |loss - enumeration| " + fmt("%.3g", worst);
  return o;
}

// ---------------------------------------------------------------- 5

osc::PopulationSignal as_population(std::vector<double> x, double fs) {
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  osc::PopulationSignal s;
  s.fs = fs;
  for (double& v : x) v = (v - mean) / sd;
  s.normalized = std::move(x);
  return s;
}

double quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

// Observed value beyond the empirical 99.9th percentile of the surrogates.
bool separated(const osc::SurrogateTest& r) {
  return r.mi > quantile(r.mi_surrogates, 0.999) && r.mvl > quantile(r.mvl_surrogates, 0.999);
}

Outcome criterion_pac_power() {
  const double fs = 500.0, depth = 0.8, theta = 6.0, gamma = 45.0;
  const std::size_t N = 60 * 500;
  std::mt19937_64 rng(5005);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> phase_src(N), amp_src(N);
  // Theta frequency wanders slowly within 5-7 Hz, as in recorded rhythms; a
  // strictly periodic carrier would stay coupled under any time shift.
  double th = 0.0, ga = 0.0, drift = 0.0;
  for (std::size_t t = 0; t < N; ++t) {
    drift = 0.999 * drift + 0.045 * noise(rng);
    th += 2.0 * std::numbers::pi * (theta + std::clamp(drift, -1.0, 1.0)) / fs;
    ga += 2.0 * std::numbers::pi * gamma / fs;
    phase_src[t] = std::cos(th) + 0.5 * noise(rng);
    amp_src[t] = (1.0 + depth * std::cos(th)) * std::cos(ga) + 0.5 * noise(rng);
  }
  osc::SurrogateOptions opts;
  opts.n_surrogates = 10000;
  opts.keep_distributions = true;
  const auto& lo = osc::band_by_name("theta");
  const auto& hi = osc::band_by_name("low-gamma");
  const auto wave = osc::coupling_test(as_population(phase_src, fs), as_population(amp_src, fs), lo, hi,
                                       55, opts);

  // The same coupling carried by spike trains: theta in the nerve layer
  // modulating gamma in layer 3.
  data::PacInjectedOptions inj;
  inj.n_utterances = 1;
  inj.duration_s = 60.0;
  inj.depths = {depth};
  const auto spikes = data::pac_injected(56, inj);
  const auto sig_phase = osc::population_signal(spikes.rasters[0][0], inj.dt_ms, 0);
  const auto sig_amp = osc::population_signal(spikes.rasters[0][3], inj.dt_ms, 3);
  const auto spk = osc::coupling_test(sig_phase, sig_amp, lo, hi, 57, opts);

  const double z_mi = (wave.mi - wave.mi_mean) / wave.mi_std;
  const double z_mvl = (wave.mvl - wave.mvl_mean) / wave.mvl_std;
  Outcome o;
  o.pass = wave.p_mi < 1e-3 && wave.p_mvl < 1e-3 && spk.p_mi < 1e-3 && spk.p_mvl < 1e-3 &&
           separated(wave) && separated(spk);
  o.detail = "waveform p_mi " + fmt("%.3g", wave.p_mi) + " p_mvl " + fmt("%.3g", wave.p_mvl) +
             " (z " + fmt("%.1f", z_mi) + "/" + fmt("%.1f", z_mvl) + "), spikes p_mi " +
             fmt("%.3g", spk.p_mi) + " p_mvl " + fmt("%.3g", spk.p_mvl) +
             (separated(wave) && separated(spk) ? ", observed above the 99.9th surrogate percentile"
                                                : ", observed inside the surrogate bulk");
  return o;
}

// ---------------------------------------------------------------- 6

Outcome criterion_pac_calibration() {
  constexpr std::size_t kTrials = 500;
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"delta", "low-gamma"}, {"theta", "low-gamma"}, {"alpha", "low-gamma"}, {"beta", "low-gamma"},
      {"delta", "high-gamma"}, {"theta", "high-gamma"}, {"alpha", "high-gamma"}, {"beta", "high-gamma"}};
  std::vector<int> mi_hit(kTrials), mvl_hit(kTrials), both(kTrials);
  std::vector<std::thread> pool;
  const std::size_t n_threads = worker_threads();
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < kTrials; i += n_threads) {
          // Two independent 64-neuron Bernoulli populations, 20 s at dt = 2 ms.
          std::mt19937_64 rng(derive_seed(6006, {i}));
          std::bernoulli_distribution fire(0.04);
          Matrix<std::uint8_t> a(10000, 64), b(10000, 64);
          for (auto& v : a.data()) v = fire(rng);
          for (auto& v : b.data()) v = fire(rng);
          const auto& pair = pairs[i % pairs.size()];
          osc::SurrogateOptions opts;
          opts.n_surrogates = 10000;
          const auto r = osc::coupling_test(osc::population_signal(a, 2.0, 0), osc::population_signal(b, 2.0, 1),
                                            osc::band_by_name(pair.first), osc::band_by_name(pair.second),
                                            derive_seed(6007, {i}), opts);
          mi_hit[i] = r.p_mi < 0.05;
          mvl_hit[i] = r.p_mvl < 0.05;
          both[i] = mi_hit[i] && mvl_hit[i];
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  // 5% +- 2% of 500 trials is 15 to 35 hits inclusive; counting avoids
  // rounding at the band edges.
  auto hits = [](const std::vector<int>& v) { return std::count(v.begin(), v.end(), 1); };
  const auto n_mi = hits(mi_hit), n_mvl = hits(mvl_hit), n_both = hits(both);
  const auto lo = static_cast<std::ptrdiff_t>(kTrials * 3 / 100), hi = static_cast<std::ptrdiff_t>(kTrials * 7 / 100);
  const double r_mi = static_cast<double>(n_mi) / kTrials, r_mvl = static_cast<double>(n_mvl) / kTrials,
               r_both = static_cast<double>(n_both) / kTrials;
  Outcome o;
  o.pass = n_mi >= lo && n_mi <= hi && n_mvl >= lo && n_mvl <= hi &&
           n_both <= static_cast<std::ptrdiff_t>(kTrials * 5 / 100);
  o.detail = "false-positive rate MI " + fmt("%.3f", r_mi) + ", MVL " + fmt("%.3f", r_mvl) + ", joint " +
             fmt("%.3f", r_both) + " over 500 trials (" + std::to_string(n_mi) + "/" + std::to_string(n_mvl) + "/" +
             std::to_string(n_both) + " hits)";
  return o;
}

// ---------------------------------------------------------------- 7

ExperimentConfig desk_config(bool recurrence_and_sfa, const fs::path& out) {
  auto c = parse_config(
      "task = command-classify\n"
      "seed = 7\n"
      "dt_ms = 5\n"
      "n_layers = 3\n"
      "neurons_per_layer = 64\n"
      "n_train = 200\nn_val = 50\nn_test = 100\n"
      "epochs = 30\nbatch_size = 16\nlearning_rate = 0.01\n"
      "analysis_high_bands = low-gamma\n",
      false);
  c.sfa_fraction = recurrence_and_sfa ? 0.5 : 0.0;
  c.rec_connectivity = recurrence_and_sfa ? 0.5 : 0.0;
  c.threads = worker_threads();
  c.output_dir = out;
  return c;
}

struct DeskRun {
  train::Evaluation test;
  std::size_t epochs = 0;
};

DeskRun train_and_test(const ExperimentConfig& c) {
  const auto result = exp::run_train(c);
  const auto ck = io::load_checkpoint(result.checkpoint, c.hash());
  const auto ds = exp::task_dataset(c);
  const auto test = data::to_examples(ds.test, c.dt_ms);
  train::StepOptions so;
  so.threads = c.threads;
  return {train::evaluate(ck.model, test, true, so), result.epochs.size()};
}

bool decays(const std::vector<double>& rates) {
  for (std::size_t l = 1; l < rates.size(); ++l) {
    if (!(rates[l] < rates[l - 1])) return false;
  }
  return rates.size() >= 3;
}

std::string rate_list(const std::vector<double>& rates) {
  std::string s;
  for (double r : rates) s += (s.empty() ? "" : "/") + fmt("%.1f", r);
  return s;
}

Outcome criterion_desk_training() {
  const auto dir = scratch("desk");
  const auto full_cfg = desk_config(true, dir / "rec_sfa");
  const auto plain_cfg = desk_config(false, dir / "plain");
  const auto full = train_and_test(full_cfg);
  const auto plain = train_and_test(plain_cfg);

  // Untrained network with the same architecture on the same test inputs.
  const auto ds = exp::task_dataset(full_cfg);
  const auto test = data::to_examples(ds.test, full_cfg.dt_ms);
  train::StepOptions so;
  so.threads = full_cfg.threads;
  const auto untrained = train::evaluate(exp::initial_model(full_cfg, ds.n_outputs), test, true, so);

  const double nyquist = train::nyquist_hz(full_cfg.dt_ms);
  bool rates_ok = true;
  for (const auto* e : {&full.test, &plain.test}) {
    for (std::size_t l = 1; l < e->layer_rates_hz.size(); ++l) {
      rates_ok &= e->layer_rates_hz[l] >= 0.5 && e->layer_rates_hz[l] <= nyquist;
    }
  }
  const double gap = 100.0 * (full.test.accuracy - plain.test.accuracy);
  const bool contrast = decays(untrained.layer_rates_hz) && !decays(full.test.layer_rates_hz);
  Outcome o;
  o.pass = gap >= 5.0 && rates_ok && contrast;
  o.detail = "test accuracy rec+SFA " + fmt("%.1f", 100.0 * full.test.accuracy) + "% vs plain " +
             fmt("%.1f", 100.0 * plain.test.accuracy) + "% (gap " + fmt("%.1f", gap) +
             " points); layer rates Hz trained " + rate_list(full.test.layer_rates_hz) + ", plain " +
             rate_list(plain.test.layer_rates_hz) + ", untrained " + rate_list(untrained.layer_rates_hz);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome criterion_scenarios() {
  const auto dir = scratch("scenarios");
  auto c = parse_config(
      "task = synthetic\nseed = 8\nn_layers = 3\nneurons_per_layer = 64\nn_test = 64\n"
      "utterance_s = 20\nn_surrogates = 200\n",
      false);
  c.output_dir = dir;
  c.threads = worker_threads();
  const auto sim = exp::run_simulate(c, std::nullopt);
  const auto an = exp::run_analyze(c, sim.spikes_path, c.n_surrogates);
  std::size_t skipped = 0;
  for (const auto& s : an.skips) skipped += s.scenarios;
  std::ifstream csv(an.csv_path);
  const auto lines = static_cast<std::size_t>(std::count(std::istreambuf_iterator<char>(csv), {}, '\n'));
  Outcome o;
  o.pass = sim.spikes.utterance_ids.size() == 64 && sim.spikes.layer_sizes.size() == 4 &&
           an.records.size() + skipped == 5120 && lines == an.records.size() + 1 &&
           an.summary.skipped_rows == skipped;
  o.detail = std::to_string(an.records.size()) + " coupling rows + " + std::to_string(skipped) +
             " logged skips = " + std::to_string(an.records.size() + skipped) + " scenarios";
  return o;
}

// ---------------------------------------------------------------- 9

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream is(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    files.emplace_back(fs::relative(e.path(), root).string(), ss.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void full_chain(const fs::path& root) {
  auto audio = parse_config(
      "task = command-classify\nseed = 9\ndt_ms = 5\nn_layers = 2\nneurons_per_layer = 16\n"
      "cnn_channels = 4\nreadout_hidden = 32\nn_train = 24\nn_val = 8\nn_test = 4\nepochs = 2\n"
      "batch_size = 8\nanalysis_high_bands = low-gamma\nn_surrogates = 100\n",
      false);
  audio.output_dir = root / "audio";
  audio.threads = 2;
  const auto trained = exp::run_train(audio);
  const auto sim = exp::run_simulate(audio, trained.checkpoint);
  const auto an = exp::run_analyze(audio, sim.spikes_path, audio.n_surrogates);
  exp::run_report(audio, sim.spikes_path, an.csv_path);

  auto synth = parse_config(
      "task = synthetic\nseed = 9\nn_layers = 3\nneurons_per_layer = 32\nn_test = 3\nutterance_s = 20\n"
      "n_surrogates = 300\n",
      false);
  synth.output_dir = root / "synthetic";
  synth.threads = 2;
  const auto ssim = exp::run_simulate(synth, std::nullopt);
  const auto san = exp::run_analyze(synth, ssim.spikes_path, synth.n_surrogates);
  exp::run_report(synth, ssim.spikes_path, san.csv_path);
}

Outcome criterion_determinism() {
  const auto a = scratch("chain_a"), b = scratch("chain_b");
  full_chain(a);
  full_chain(b);
  const auto sa = snapshot(a), sb = snapshot(b);
  std::size_t bytes = 0, differing = 0;
  for (std::size_t i = 0; i < std::min(sa.size(), sb.size()); ++i) {
    bytes += sa[i].second.size();
    differing += sa[i] != sb[i];
  }
  Outcome o;
  o.pass = sa.size() == sb.size() && differing == 0 && sa.size() >= 12;
  o.detail = std::to_string(sa.size()) + " artifacts (" + std::to_string(bytes) + " bytes), " +
             std::to_string(differing) + " differ";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "integrator convergence", criterion_integrator},
      {2, "eigenvalues and stability", criterion_stability},
      {3, "bptt gradient check", criterion_gradients},
      {4, "ctc against path enumeration", criterion_ctc},
      {5, "pac detection power", criterion_pac_power},
      {6, "pac false-positive calibration", criterion_pac_calibration},
      {7, "desk-scale training", criterion_desk_training},
      {8, "scenario accounting", criterion_scenarios},
      {9, "end-to-end determinism", criterion_determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail
              << " [" << fmt("%.1f", secs) << " s]" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
