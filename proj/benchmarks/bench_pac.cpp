#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spikeosc/filters.hpp"
#include "spikeosc/pac.hpp"

using namespace spikeosc;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Surrogate test on 20 s at 500 Hz; argument = number of surrogates.
void BM_SurrogateTest(benchmark::State& state) {
  const auto phase_src = noise(10000, 1);
  std::vector<double> phase(phase_src.size()), amp = noise(10000, 2);
  for (std::size_t i = 0; i < phase.size(); ++i) {
    phase[i] = std::remainder(phase_src[i], 2.0 * std::numbers::pi);
    amp[i] = std::abs(amp[i]);
  }
  osc::SurrogateOptions opts;
  opts.n_surrogates = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = osc::surrogate_pvalues(phase, amp, 7, opts);
    benchmark::DoNotOptimize(r.p_mi);
  }
}
BENCHMARK(BM_SurrogateTest)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

// Zero-phase band-pass plus analytic signal; argument = band index.
void BM_BandAnalytic(benchmark::State& state) {
  static const char* bands[] = {"delta", "theta", "low-gamma"};
  const auto& band = osc::band_by_name(bands[state.range(0)]);
  const auto x = noise(10000, 3);
  const auto taps = osc::design_bandpass(band, 500.0);
  for (auto _ : state) {
    const auto y = osc::filter_zero_phase(x, taps);
    auto a = osc::analytic_signal(y);
    benchmark::DoNotOptimize(a.phase.data());
  }
  state.SetLabel(band.name);
}
BENCHMARK(BM_BandAnalytic)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
