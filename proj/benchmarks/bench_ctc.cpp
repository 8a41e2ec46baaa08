#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spikeosc/ctc.hpp"
#include "spikeosc/readout.hpp"

using namespace spikeosc;

namespace {

// Loss and gradient for a T x 40 lattice with a target of T / 4 labels.
void BM_CtcLossAndGrad(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  MatrixD lp(T, 40);
  for (auto& v : lp.data()) v = g(rng);
  train::log_softmax_rows(lp);
  std::vector<int> target;
  for (std::size_t i = 0; i < T / 4; ++i) target.push_back(1 + static_cast<int>(rng() % 39));
  for (auto _ : state) {
    auto r = train::ctc_loss(lp, target, true);
    benchmark::DoNotOptimize(r.loss);
  }
}
BENCHMARK(BM_CtcLossAndGrad)->Arg(25)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

}  // namespace
