#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spikeosc/model.hpp"

namespace spikeosc {

enum class Task { phoneme_ctc, command_classify, synthetic };

std::string to_string(Task t);

// Everything an experiment needs. Defaults match a fresh `task = synthetic` file.
struct ExperimentConfig {
  Task task = Task::synthetic;
  std::uint64_t seed = 0;

  // network
  double dt_ms = 2.0;
  std::size_t n_layers = 3;
  std::size_t neurons_per_layer = 512;
  double sfa_fraction = 0.5;
  double ff_connectivity = 1.0;
  double rec_connectivity = 0.5;
  bool dale_enabled = false;
  double excitatory_fraction = 0.5;
  std::string weight_init = "fluctuation";  // fluctuation | fan-in
  double init_rate_hz = 6.0;
  bool strict_stability = false;

  // frontend and readout
  std::size_t cnn_channels = 16;
  double cnn_dropout = 0.15;
  bool layer_norm = true;
  std::size_t readout_hidden = 512;

  // training
  double reg_weight = 0.1;
  double f_min_hz = 0.5;
  double f_max_hz = 0.0;  // 0 selects the Nyquist frequency
  bool reset_gradient = true;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double grad_clip = 0.0;

  // datasets
  std::size_t n_train = 200;
  std::size_t n_val = 50;
  std::size_t n_test = 64;
  double utterance_s = 20.0;  // synthetic spike utterances
  std::vector<double> pac_depths{0.0, 0.4, 0.8};

  // simulation and analysis (excluded from the config hash)
  std::string simulate_input = "test";  // test | silence | noise-uniform | noise-babble | noise-stationary
  std::size_t top_k = 0;                // keep the K longest utterances; 0 keeps all
  std::vector<std::string> analysis_low_bands{"delta", "theta", "alpha", "beta"};
  std::vector<std::string> analysis_high_bands{"low-gamma", "high-gamma"};
  std::size_t n_surrogates = 10000;
  std::size_t n_bins = 18;
  std::size_t report_utterance = 0;
  std::size_t report_layer = 0;
  std::size_t threads = 1;

  // paths
  std::filesystem::path output_dir = "run";

  /// Throws Errc::config naming the key and its valid range.
  void validate() const;

  /// Model hyper-parameters for a task with `n_outputs` readout classes.
  train::ModelConfig model_config(std::size_t n_outputs) const;

  /// FNV-1a over the canonical text of every key that influences model and
  /// spike outputs (paths, analysis and thread settings excluded).
  std::uint64_t hash() const;

  /// Canonical `key = value` listing of every key, sorted.
  std::string canonical_text() const;
};

/// Parses `key = value` lines (`#` starts a comment). Unknown keys are
/// rejected. `SPIKEOSC_<KEY>` environment variables override file values.
ExperimentConfig parse_config(const std::string& text, bool apply_environment = true);
ExperimentConfig load_config(const std::filesystem::path& path, bool apply_environment = true);

/// Applies one setting; throws Errc::config for unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Names of every accepted key.
std::vector<std::string> config_keys();

}  // namespace spikeosc
