#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spikeosc/model.hpp"
#include "spikeosc/network.hpp"
#include "spikeosc/optimizer.hpp"
#include "spikeosc/trainer.hpp"

using namespace spikeosc;

namespace {

MatrixD random_spikes(std::size_t T, std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution fire(p);
  MatrixD x(T, n);
  for (auto& v : x.data()) v = fire(rng) ? 1.0 : 0.0;
  return x;
}

// One spiking layer over 1 s at dt = 2 ms; argument = layer width.
void BM_LayerForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  net::LayerSpec spec;
  spec.n_neurons = n;
  const std::vector<net::LayerSpec> specs{spec};
  const auto topo = net::build_topology(n, specs, 2.0, 1);
  const auto input = random_spikes(500, n, 0.02, 2);
  for (auto _ : state) {
    auto tr = net::run_layer(topo.layers[1], input, 2.0, net::SpikeFunction::heaviside, 1);
    benchmark::DoNotOptimize(tr.s.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 500 * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LayerForward)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

// Forward, BPTT and AdamW update of a 3 x 64 model on a 1 s utterance at dt = 5 ms.
void BM_TrainStep(benchmark::State& state) {
  train::ModelConfig cfg;
  cfg.dt_ms = 5.0;
  net::LayerSpec spec;
  spec.n_neurons = 64;
  cfg.layers.assign(3, spec);
  cfg.readout.pool_factor = train::ReadoutConfig::pool_for_dt(5.0);
  cfg.readout.hidden = 64;
  cfg.readout.n_outputs = 11;
  auto model = train::Model::initialise(cfg, 3);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  train::Example ex;
  ex.features = MatrixD(200, cfg.n_mels);
  for (auto& v : ex.features.data()) v = g(rng);
  ex.target = {3};
  ex.label = 3;
  const std::vector<train::Example> batch{ex};
  train::AdamW opt;
  std::uint64_t step = 0;
  for (auto _ : state) {
    auto loss = train::train_step(model, opt, batch, step++);
    benchmark::DoNotOptimize(loss.total);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
