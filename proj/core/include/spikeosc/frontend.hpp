#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::frontend {

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

struct MelOptions {
  std::size_t n_mels = 80;
  double win_ms = 25.0;
  double hop_ms = 2.0;
  double log_epsilon = 1e-10;
};

struct MelFeatures {
  MatrixD values;  // time x n_mels
  double frame_rate = 500.0;
};

// 16-bit PCM WAV; stereo input is averaged to mono. Samples scaled to [-1, 1).
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wav);

/// Triangular filters evenly spaced on the HTK mel scale between 0 Hz and
/// Nyquist, evaluated on the rfft bins: n_mels x (n_fft / 2 + 1).
MatrixD mel_filterbank(std::size_t n_mels, std::size_t n_fft, double sample_rate);

/// Centre frequencies (Hz) of the mel filters.
std::vector<double> mel_centers(std::size_t n_mels, double sample_rate);

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// Hann-windowed magnitude STFT -> mel filterbank -> log(x + eps).
/// Frame count is floor((n - win) / hop) + 1. Throws Errc::too_short when the
/// waveform is shorter than one window and Errc::invalid_parameter for hop not
/// in {1, 2, 5} ms.
MelFeatures mel_features(const Waveform& wav, const MelOptions& options = {});

void write_features_csv(const std::filesystem::path& path, const MelFeatures& features);

inline constexpr std::size_t kCnnKernel = 7;

// Single-layer 2-D convolution over (time, mel) followed by layer norm,
// channel dropout and LeakyReLU. Output features are laid out channel-major:
// index c * (n_mels - 6) + f.
struct AuditoryCnn {
  std::size_t channels = 16;
  std::size_t n_mels = 80;
  std::vector<double> kernels;  // channels x 7 x 7, (time, mel) order
  std::vector<double> bias;     // channels
  std::vector<double> ln_gain;  // n_fibers
  std::vector<double> ln_bias;  // n_fibers

  std::size_t bands() const noexcept { return n_mels - kCnnKernel + 1; }
  std::size_t n_fibers() const noexcept { return channels * bands(); }

  static AuditoryCnn initialise(std::size_t channels, std::size_t n_mels, std::uint64_t seed);

  friend bool operator==(const AuditoryCnn&, const AuditoryCnn&) = default;
};

struct CnnOptions {
  bool layer_norm = true;
  bool training = false;  // dropout active only when training
  double dropout = 0.15;
  double leaky_slope = 0.01;
  double norm_epsilon = 1e-5;
  friend bool operator==(const CnnOptions&, const CnnOptions&) = default;
};

// Intermediate values kept for the backward pass.
struct CnnTrace {
  MatrixD conv;        // T x n_fibers, before normalisation
  MatrixD normalised;  // T x n_fibers, (conv - mean) / std
  std::vector<double> inv_std;        // per frame
  std::vector<double> channel_scale;  // dropout multiplier per channel
  MatrixD pre_activation;             // T x n_fibers
};

/// Nerve stimulus, T x n_fibers. The time padding of 7 yields T + 8 frames,
/// which are cropped by 4 at each end so the output keeps T frames; this is
/// the same as a centred kernel with 3 frames of zero padding.
MatrixD auditory_cnn(const MatrixD& features, const AuditoryCnn& cnn, const CnnOptions& options,
                     std::mt19937_64* dropout_rng = nullptr, CnnTrace* trace = nullptr);

/// Accumulates parameter gradients into `grad` (same shape as `cnn`) given
/// dLoss/dOutput.
void auditory_cnn_backward(const MatrixD& features, const AuditoryCnn& cnn,
                           const CnnOptions& options, const CnnTrace& trace,
                           const MatrixD& grad_output, AuditoryCnn& grad);

}  // namespace spikeosc::frontend
