#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "spikeosc/config.hpp"
#include "spikeosc/datasets.hpp"
#include "spikeosc/pac.hpp"
#include "spikeosc/spike_export.hpp"
#include "spikeosc/trainer.hpp"

namespace spikeosc::exp {

struct EpochLog {
  std::size_t epoch = 0;
  double ctc = 0.0;
  double reg = 0.0;
  double total = 0.0;
  double mean_firing_rate_hz = 0.0;
  double val_metric = 0.0;  // accuracy, or token error rate for sequence tasks
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_val_metric = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path log;
};

/// Dataset for an audio task (phoneme-ctc or command-classify).
data::AudioDataset task_dataset(const ExperimentConfig& config);

/// Freshly initialised model for the configured task.
train::Model initial_model(const ExperimentConfig& config, std::size_t n_outputs);

/// Trains for `epochs`, writing train_log.jsonl and the best-validation
/// checkpoint.bin into output_dir. Divergence errors carry epoch and batch.
TrainResult run_train(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Inference spikes of every layer (nerve first) for each example.
io::SpikeExport simulate_examples(const train::Model& model, std::span<const train::Example> examples,
                                  std::uint64_t config_hash, std::size_t threads = 1);

struct RateHistogram {
  double bin_width_hz = 5.0;
  std::vector<std::vector<std::size_t>> counts;  // [layer][bin], one entry per (utterance, neuron)
  std::vector<double> mean_rate_hz;              // per layer
};

RateHistogram rate_histogram(const io::SpikeExport& spikes, double bin_width_hz = 5.0);

struct SimulateResult {
  io::SpikeExport spikes;
  std::filesystem::path spikes_path;
  std::filesystem::path rates_path;
};

/// Writes spikes.bin and rates.json. The synthetic task generates
/// pac-injected rasters; other tasks run the checkpoint (or a fresh model when
/// `untrained`) on the input selected by simulate_input.
SimulateResult run_simulate(const ExperimentConfig& config,
                            const std::optional<std::filesystem::path>& checkpoint,
                            bool untrained = false);

struct AnalyzeResult {
  std::vector<osc::CouplingRecord> records;
  std::vector<osc::ScanSkip> skips;
  osc::ScanSummary summary;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// PAC scan of every utterance; writes couplings.csv and analysis.json.
AnalyzeResult run_analyze(const ExperimentConfig& config, const std::filesystem::path& spikes,
                          std::size_t n_surrogates);

struct ReportResult {
  std::vector<std::filesystem::path> files;
};

/// Plot-ready CSVs: raster, firing-rate histogram, band overlay and the
/// surrogate distributions of the strongest coupling.
ReportResult run_report(const ExperimentConfig& config, const std::filesystem::path& spikes,
                        const std::filesystem::path& couplings);

}  // namespace spikeosc::exp
