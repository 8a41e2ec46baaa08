#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "spikeosc/filters.hpp"
#include "spikeosc/pac.hpp"
#include "spikeosc/population.hpp"
#include "test_util.hpp"

using namespace spikeosc;
using namespace spikeosc::osc;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(double hz, double fs, std::size_t n, double phase0 = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::cos(2.0 * kPi * hz * static_cast<double>(t) / fs + phase0);
  return x;
}

std::vector<double> uniform_phase(std::size_t n, std::size_t period) {
  std::vector<double> p(n);
  for (std::size_t t = 0; t < n; ++t) {
    p[t] = std::remainder(2.0 * kPi * static_cast<double>(t % period) / static_cast<double>(period), 2.0 * kPi);
  }
  return p;
}

Matrix<std::uint8_t> random_raster(std::size_t T, std::size_t N, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  Matrix<std::uint8_t> m(T, N);
  for (auto& v : m.data()) v = b(rng) ? 1 : 0;
  return m;
}

}  // namespace

TEST(PopulationSignal, Degenerate) {
  EXPECT_ERRC(population_signal(Matrix<std::uint8_t>(50, 4), 2.0, 0), Errc::degenerate_signal);
  Matrix<std::uint8_t> one(50, 4);
  for (std::size_t t = 0; t < 50; ++t) one(t, 0) = 1;
  EXPECT_ERRC(population_signal(one, 2.0, 0), Errc::degenerate_signal);
  EXPECT_ERRC(population_signal(Matrix<std::uint8_t>(1, 4), 2.0, 0), Errc::too_short);
}

TEST(PopulationSignal, ZScoredCounts) {
  const auto raster = random_raster(400, 30, 0.2, 1);
  const auto sig = population_signal(raster, 2.0, 3);
  EXPECT_EQ(sig.layer_id, 3u);
  EXPECT_DOUBLE_EQ(sig.fs, 500.0);
  double mean = 0.0, var = 0.0;
  for (std::size_t t = 0; t < 400; ++t) {
    std::uint32_t count = 0;
    for (auto v : raster.row(t)) count += v;
    EXPECT_EQ(sig.raw[t], count);
    mean += sig.normalized[t];
  }
  mean /= 400.0;
  for (double v : sig.normalized) var += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(var / 400.0), 1.0, 1e-9);
}

TEST(Bandpass, ThetaResponse) {
  const auto taps = design_bandpass(band_by_name("theta"), 500.0);
  EXPECT_LT(20.0 * std::log10(std::abs(frequency_response(taps, 0.0, 500.0)) + 1e-300), -30.0);
  EXPECT_LT(std::abs(20.0 * std::log10(std::abs(frequency_response(taps, 6.0, 500.0)))), 1.0);
  ASSERT_EQ(taps.size() % 2, 1u);
  for (std::size_t i = 0; i < taps.size(); ++i) EXPECT_EQ(taps[i], taps[taps.size() - 1 - i]);
}

TEST(Bandpass, LengthRule) {
  for (const auto& band : canonical_bands()) {
    const auto n = bandpass_length(band, 500.0);
    EXPECT_EQ(n % 2, 1u);
    EXPECT_GE(n, 33u);
    EXPECT_GE(static_cast<double>(n), 3.0 * 500.0 / band.lo);
  }
}

TEST(Bandpass, InvalidBands) {
  EXPECT_ERRC(design_bandpass({"x", 100.0, 300.0}, 500.0), Errc::invalid_band);
  EXPECT_ERRC(design_bandpass(band_by_name("high-gamma"), 200.0), Errc::invalid_band);
  EXPECT_ERRC(design_bandpass({"x", 0.0, 10.0}, 500.0), Errc::invalid_band);
  EXPECT_ERRC(band_by_name("kappa"), Errc::invalid_band);
}

TEST(Bandpass, SixHertzPartition) {
  const auto tone = sine(6.0, 500.0, 20000);
  for (const auto& band : canonical_bands()) {
    const double g = std::abs(frequency_response(design_bandpass(band, 500.0), 6.0, 500.0));
    if (band.name == "theta") {
      EXPECT_GT(g, 0.9);
    } else if (band.name != "delta") {
      EXPECT_LT(g, 0.03) << band.name;
    }
  }
  // The same through the zero-phase path, measured away from the edges.
  const auto taps = design_bandpass(band_by_name("alpha"), 500.0);
  const auto y = filter_zero_phase(tone, taps);
  double peak = 0.0;
  for (std::size_t t = taps.size(); t + taps.size() < y.size(); ++t) peak = std::max(peak, std::abs(y[t]));
  EXPECT_LT(peak, 0.03 * 0.03 + 1e-3);
}

TEST(FilterZeroPhase, InBandSineKeepsPhase) {
  const auto taps = design_bandpass(band_by_name("theta"), 500.0);
  const auto x = sine(6.0, 500.0, 5000, 0.7);
  const auto y = filter_zero_phase(x, taps);
  const std::size_t edge = taps.size();
  double best = -1e300;
  int best_lag = 99;
  for (int lag = -10; lag <= 10; ++lag) {
    double c = 0.0;
    for (std::size_t t = edge + 10; t + edge + 10 < x.size(); ++t) {
      c += x[t] * y[static_cast<std::size_t>(static_cast<long>(t) + lag)];
    }
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  EXPECT_EQ(best_lag, 0);
}

TEST(FilterZeroPhase, DcAndLinearity) {
  const auto taps = design_bandpass(band_by_name("beta"), 500.0);
  const std::vector<double> dc(3000, 2.5);
  const auto y = filter_zero_phase(dc, taps);
  for (std::size_t t = taps.size(); t + taps.size() < y.size(); ++t) EXPECT_NEAR(y[t], 0.0, 2.5e-3);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> a(3000), b(3000), mix(3000);
  for (std::size_t i = 0; i < 3000; ++i) {
    a[i] = n(rng);
    b[i] = n(rng);
    mix[i] = 2.0 * a[i] - 0.5 * b[i];
  }
  const auto fa = filter_zero_phase(a, taps), fb = filter_zero_phase(b, taps), fm = filter_zero_phase(mix, taps);
  for (std::size_t i = 0; i < 3000; ++i) EXPECT_NEAR(fm[i], 2.0 * fa[i] - 0.5 * fb[i], 1e-9);
}

TEST(FilterZeroPhase, TooShort) {
  const auto taps = design_bandpass(band_by_name("theta"), 500.0);
  const std::vector<double> x(3 * taps.size(), 1.0);
  EXPECT_ERRC(filter_zero_phase(x, taps), Errc::too_short);
}

TEST(AnalyticSignal, Cosine) {
  const double fs = 500.0, f = 40.0;
  const auto a = analytic_signal(sine(f, fs, 2000));
  for (double v : a.amplitude) EXPECT_GE(v, 0.0);
  for (std::size_t t = 100; t < 1900; ++t) {
    EXPECT_NEAR(a.amplitude[t], 1.0, 0.02);
    const double step = std::remainder(a.phase[t + 1] - a.phase[t], 2.0 * kPi);
    EXPECT_NEAR(step, 2.0 * kPi * f / fs, 1e-2);
  }
}

TEST(AnalyticSignal, ScalingAndMinimumLength) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> x(256), y(256);
  for (std::size_t i = 0; i < 256; ++i) {
    x[i] = n(rng);
    y[i] = 3.0 * x[i];
  }
  const auto a = analytic_signal(x), b = analytic_signal(y);
  for (std::size_t i = 0; i < 256; ++i) {
    EXPECT_NEAR(b.amplitude[i], 3.0 * a.amplitude[i], 1e-9);
    EXPECT_NEAR(std::remainder(b.phase[i] - a.phase[i], 2.0 * kPi), 0.0, 1e-9);
  }
  EXPECT_ERRC(analytic_signal(std::vector<double>(7, 1.0)), Errc::too_short);
}

TEST(ModulationIndex, ClosedForms) {
  const auto phase = uniform_phase(3600, 360);
  EXPECT_NEAR(modulation_index(phase, std::vector<double>(3600, 2.0)), 0.0, 1e-12);
  std::vector<double> one_bin(3600, 0.0);
  for (std::size_t t = 0; t < 3600; ++t) {
    if (phase[t] >= -kPi && phase[t] < -kPi + 2.0 * kPi / 18.0) one_bin[t] = 1.0;
  }
  EXPECT_NEAR(modulation_index(phase, one_bin), 1.0, 1e-12);
  std::vector<double> cosine(3600);
  for (std::size_t t = 0; t < 3600; ++t) cosine[t] = 1.0 + 0.5 * std::cos(phase[t]);
  const double mi = modulation_index(phase, cosine);
  EXPECT_NEAR(mi, oracles::modulation_index_reference(phase, cosine, 18), 1e-12);
  EXPECT_GT(mi, 0.0);
  EXPECT_LT(mi, 1.0);
}

TEST(ModulationIndex, EmptyBinsAreCounted) {
  std::vector<double> phase(100, 0.1), amp(100, 1.0);
  std::size_t empty = 0;
  const double mi = modulation_index(phase, amp, 18, &empty);
  EXPECT_EQ(empty, 17u);
  EXPECT_NEAR(mi, 1.0, 1e-12);
}

TEST(ModulationIndex, RangeOnRandomData) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ph(-kPi, kPi), am(0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p(500), a(500);
    for (std::size_t t = 0; t < 500; ++t) {
      p[t] = ph(rng);
      a[t] = am(rng);
    }
    const double mi = modulation_index(p, a);
    EXPECT_GE(mi, 0.0);
    EXPECT_LE(mi, 1.0);
  }
}

TEST(MeanVectorLength, ClosedForms) {
  const auto phase = uniform_phase(3600, 360);
  EXPECT_EQ(mean_vector_length(phase, std::vector<double>(3600, 0.0)), 0.0);
  EXPECT_NEAR(mean_vector_length(phase, std::vector<double>(3600, 2.0)), 0.0, 1e-12);
  std::vector<double> amp(3600);
  for (std::size_t t = 0; t < 3600; ++t) amp[t] = 1.0 + std::cos(phase[t]);
  EXPECT_NEAR(mean_vector_length(phase, amp), 0.5, 1e-9);
}

TEST(MeanVectorLength, PhaseShiftInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ph(-kPi, kPi), am(0.0, 3.0);
  std::vector<double> p(700), a(700), q(700);
  for (std::size_t t = 0; t < 700; ++t) {
    p[t] = ph(rng);
    a[t] = am(rng);
    q[t] = p[t] + 1.234;
  }
  EXPECT_NEAR(mean_vector_length(p, a), mean_vector_length(q, a), 1e-9);
}

TEST(Surrogates, RotationPreservesMultiset) {
  std::vector<double> x(97);
  std::iota(x.begin(), x.end(), 0.0);
  for (std::size_t k : {1u, 13u, 96u}) {
    auto r = rotate_segments(x, k);
    EXPECT_EQ(r[0], static_cast<double>(k));
    EXPECT_EQ(r.back(), static_cast<double>(k - 1));
    std::sort(r.begin(), r.end());
    EXPECT_EQ(r, x);
  }
}

TEST(Surrogates, GaussianTail) {
  EXPECT_DOUBLE_EQ(gaussian_upper_tail(1.0, 1.0, 0.3), 0.5);
  EXPECT_NEAR(gaussian_upper_tail(1.96, 0.0, 1.0), 0.025, 1e-4);
}

TEST(Surrogates, ReproducibleAndSeedSensitive) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ph(-kPi, kPi), am(0.0, 1.0);
  std::vector<double> p(600), a(600);
  for (std::size_t t = 0; t < 600; ++t) {
    p[t] = ph(rng);
    a[t] = am(rng);
  }
  SurrogateOptions o;
  o.n_surrogates = 500;
  const auto r1 = surrogate_pvalues(p, a, 11, o), r2 = surrogate_pvalues(p, a, 11, o);
  EXPECT_EQ(r1.p_mi, r2.p_mi);
  EXPECT_EQ(r1.p_mvl, r2.p_mvl);
  const auto r3 = surrogate_pvalues(p, a, 12, o);
  EXPECT_NE(r1.p_mi, r3.p_mi);
  EXPECT_EQ(r1.mi, modulation_index(p, a));
  EXPECT_EQ(r1.mvl, mean_vector_length(p, a));
}

TEST(Surrogates, Errors) {
  const std::vector<double> p(63, 0.0), a(63, 1.0);
  EXPECT_ERRC(surrogate_pvalues(p, a, 1), Errc::too_short);
  const auto phase = uniform_phase(640, 64);
  SurrogateOptions o;
  o.n_surrogates = 50;
  EXPECT_ERRC(surrogate_pvalues(phase, std::vector<double>(640, 1.0), 1, o), Errc::degenerate_surrogate);
}

TEST(PacScan, RecordCountsAndSkips) {
  std::vector<Matrix<std::uint8_t>> rasters;
  for (std::uint64_t l = 0; l < 4; ++l) rasters.push_back(random_raster(10000, 20, 0.1, 10 + l));
  ScanOptions o;
  o.surrogates.n_surrogates = 100;
  const auto r = pac_scan(rasters, 2.0, "utt", o);
  EXPECT_EQ(r.records.size(), 80u);
  EXPECT_TRUE(r.skips.empty());
  std::size_t intra = 0;
  for (const auto& rec : r.records) {
    EXPECT_LE(rec.phase_layer, rec.amp_layer);
    EXPECT_EQ(rec.significant, rec.p_mi < 0.05 && rec.p_mvl < 0.05);
    intra += rec.intra();
  }
  EXPECT_EQ(intra, 32u);

  rasters[2] = Matrix<std::uint8_t>(10000, 20);
  const auto s = pac_scan(rasters, 2.0, "utt", o);
  // Layer 2 takes part in 2->2, 0->2, 1->2 and 2->3.
  EXPECT_EQ(s.records.size(), 80u - 4u * 8u);
  std::size_t skipped = 0;
  for (const auto& k : s.skips) skipped += k.scenarios;
  EXPECT_EQ(skipped, 32u);
  const auto summary = summarize(s.records, s.skips);
  EXPECT_EQ(summary.rows + summary.skipped_rows, 80u);
}

TEST(PacScan, ThreadCountDoesNotChangeResults) {
  std::vector<Matrix<std::uint8_t>> rasters;
  for (std::uint64_t l = 0; l < 3; ++l) rasters.push_back(random_raster(10000, 15, 0.1, 20 + l));
  ScanOptions o;
  o.surrogates.n_surrogates = 60;
  o.seed = 5;
  const auto a = pac_scan(rasters, 2.0, "u", o);
  o.threads = 3;
  const auto b = pac_scan(rasters, 2.0, "u", o);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].p_mi, b.records[i].p_mi);
    EXPECT_EQ(a.records[i].mvl, b.records[i].mvl);
  }
}

TEST(CouplingCsv, RoundTrip) {
  CouplingRecord r;
  r.utterance_id = "a-1";
  r.phase_layer = 1;
  r.amp_layer = 3;
  r.low_band = "theta";
  r.high_band = "low-gamma";
  r.mi = 1.0 / 3.0;
  r.mvl = 0.1;
  r.p_mi = 1e-7;
  r.p_mvl = 0.04;
  r.significant = true;
  r.empty_bins = 2;
  const std::vector<CouplingRecord> rows{r, r};
  const auto path = std::filesystem::temp_directory_path() / "spikeosc_couplings.csv";
  write_coupling_csv(path, rows);
  const auto back = read_coupling_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].mi, r.mi);
  EXPECT_EQ(back[0].p_mi, r.p_mi);
  EXPECT_EQ(back[0].high_band, "low-gamma");
  EXPECT_EQ(back[0].empty_bins, 2u);
  EXPECT_TRUE(back[1].significant);
}
