#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikeosc/filters.hpp"
#include "spikeosc/population.hpp"

namespace spikeosc::osc {

inline constexpr std::size_t kDefaultPhaseBins = 18;

/// Tort modulation index in [0, 1]. Empty phase bins contribute zero; their
/// number is written to `empty_bins` when given.
double modulation_index(std::span<const double> phase, std::span<const double> amplitude,
                        std::size_t n_bins = kDefaultPhaseBins, std::size_t* empty_bins = nullptr);

/// |mean(amplitude * exp(i phase))|.
double mean_vector_length(std::span<const double> phase, std::span<const double> amplitude);

/// concat(x[k:], x[:k]), the segment swap at cut k.
std::vector<double> rotate_segments(std::span<const double> x, std::size_t k);

struct SurrogateTest {
  double mi = 0.0;
  double mvl = 0.0;
  double p_mi = 1.0;
  double p_mvl = 1.0;
  double mi_mean = 0.0, mi_std = 0.0;
  double mvl_mean = 0.0, mvl_std = 0.0;
  std::size_t empty_bins = 0;
  std::vector<double> mi_surrogates;   // filled only when requested
  std::vector<double> mvl_surrogates;
};

struct SurrogateOptions {
  std::size_t n_surrogates = 10000;
  std::size_t n_bins = kDefaultPhaseBins;
  bool keep_distributions = false;
};

/// Segment-swap surrogate distribution for MI and MVL, a Gaussian fit by
/// sample moments and one-sided upper-tail p-values. Cut points are drawn
/// uniformly from [1, T - 1] by a generator seeded with `seed`. Throws
/// Errc::too_short for T < 64 and Errc::degenerate_surrogate when a fitted
/// standard deviation is zero.
SurrogateTest surrogate_pvalues(std::span<const double> phase, std::span<const double> amplitude,
                                std::uint64_t seed, const SurrogateOptions& options = {});

/// Upper-tail Gaussian probability of `observed` under N(mean, sd^2).
double gaussian_upper_tail(double observed, double mean, double sd) noexcept;

struct CouplingRecord {
  std::string utterance_id;
  std::size_t phase_layer = 0;
  std::size_t amp_layer = 0;
  std::string low_band;
  std::string high_band;
  double mi = 0.0;
  double mvl = 0.0;
  double p_mi = 1.0;
  double p_mvl = 1.0;
  bool significant = false;
  std::size_t empty_bins = 0;

  bool intra() const noexcept { return phase_layer == amp_layer; }
};

struct ScanSkip {
  std::string utterance_id;
  std::string scope;   // e.g. "layer 2" or "layer 0 -> 3 theta/low-gamma"
  std::string reason;
  std::size_t scenarios = 0;  // coupling rows not emitted because of this skip
};

struct ScanOptions {
  std::vector<std::string> low_bands{"delta", "theta", "alpha", "beta"};
  std::vector<std::string> high_bands{"low-gamma", "high-gamma"};
  SurrogateOptions surrogates;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ScanResult {
  std::vector<CouplingRecord> records;
  std::vector<ScanSkip> skips;
};

/// One scenario from population signals: band-pass both, take phase and
/// envelope, drop the edge transients of the longer filter and run the
/// surrogate test. pac_scan produces the same numbers for the same seed.
SurrogateTest coupling_test(const PopulationSignal& phase_signal, const PopulationSignal& amp_signal,
                            const FrequencyBand& low, const FrequencyBand& high, std::uint64_t seed,
                            const SurrogateOptions& options = {});

/// Seed of one (utterance, relation, band pair) scenario.
std::uint64_t scenario_seed(std::uint64_t seed, std::string_view utterance_id,
                            std::size_t phase_layer, std::size_t amp_layer,
                            std::string_view low_band, std::string_view high_band);

/// Every relation with phase layer <= amplitude layer crossed with every
/// (low, high) band pair. `layers[i]` is empty for a degenerate layer, with
/// the reason in `degenerate_reasons[i]`.
ScanResult pac_scan(std::span<const std::optional<PopulationSignal>> layers,
                    std::span<const std::string> degenerate_reasons,
                    const std::string& utterance_id, const ScanOptions& options);

/// Scan from per-layer T x N rasters; degenerate layers are detected here.
ScanResult pac_scan(std::span<const Matrix<std::uint8_t>> rasters, double dt_ms,
                    const std::string& utterance_id, const ScanOptions& options);

struct ScanSummary {
  std::size_t rows = 0;
  std::size_t skipped_rows = 0;
  std::size_t intra_total = 0;  // significant intra-layer records
  std::size_t inter_total = 0;  // significant inter-layer records
  std::map<std::string, std::size_t> per_band_counts;  // "low/high" -> significant count
};

ScanSummary summarize(std::span<const CouplingRecord> records, std::span<const ScanSkip> skips);

void write_coupling_csv(const std::filesystem::path& path, std::span<const CouplingRecord> records);
std::vector<CouplingRecord> read_coupling_csv(const std::filesystem::path& path);

}  // namespace spikeosc::osc
