#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeosc/frontend.hpp"
#include "spikeosc/spike_export.hpp"
#include "spikeosc/trainer.hpp"

namespace spikeosc::data {

struct Utterance {
  std::string id;
  frontend::Waveform wav;
  std::vector<int> target;  // labels 1..n_outputs-1
  int label = -1;           // class label for single-label tasks

  double duration_s() const noexcept {
    return static_cast<double>(wav.samples.size()) / wav.sample_rate;
  }
};

struct AudioDataset {
  std::string kind;
  std::size_t n_outputs = 0;  // classes including the CTC blank
  std::vector<Utterance> train, val, test;
};

struct SplitSizes {
  std::size_t train = 200;
  std::size_t val = 50;
  std::size_t test = 64;
};

/// Sequences of 2 to 5 tones from a 3-symbol alphabet (one carrier band per
/// symbol), 1 to 3 s long, labelled for CTC.
AudioDataset tone_sequences(std::uint64_t seed, const SplitSizes& sizes);

/// Ten 1 s "command words": two amplitude-modulated tones separated by a short
/// pause. Classes come in pairs sharing the same two carriers in opposite
/// order, so only the temporal order separates the members of a pair.
AudioDataset am_commands(std::uint64_t seed, const SplitSizes& sizes);

struct PacInjectedOptions {
  std::size_t n_utterances = 64;
  std::size_t n_layers = 4;  // nerve layer included
  std::size_t neurons = 64;
  double dt_ms = 2.0;
  double duration_s = 20.0;
  std::vector<double> depths{0.0, 0.4, 0.8};  // cycled across utterances
  double base_rate_hz = 20.0;
  double theta_hz = 6.0;
  double gamma_hz = 45.0;
  std::size_t phase_layer = 0;
  std::size_t amp_layer = 3;
};

/// Spike rasters with theta phase in `phase_layer` modulating the gamma
/// envelope of `amp_layer` by the given depth; other layers oscillate
/// independently. Utterance ids encode the depth.
io::SpikeExport pac_injected(std::uint64_t seed, const PacInjectedOptions& options);

/// Modulation depth encoded in a pac-injected utterance id, or -1.
double pac_depth_from_id(const std::string& id);

enum class NoiseKind { uniform, babble, stationary };

NoiseKind noise_kind_from_string(const std::string& name);

/// Control inputs: uniform white noise, babble-like (sum of 6 speech-band AM
/// tones) or stationary band-limited Gaussian noise.
frontend::Waveform noise_input(NoiseKind kind, double duration_s, std::uint64_t seed,
                               double sample_rate = 16000.0);

/// Indices of the K longest utterances (ties by position); K = 0 keeps all,
/// in the original order.
std::vector<std::size_t> top_k_by_duration(const std::vector<double>& durations, std::size_t k);

/// Log-mel features with a hop of dt_ms, ready for the model.
train::Example to_example(const Utterance& utt, double dt_ms, std::size_t n_mels = 80);
std::vector<train::Example> to_examples(const std::vector<Utterance>& utts, double dt_ms,
                                        std::size_t n_mels = 80);

}  // namespace spikeosc::data
