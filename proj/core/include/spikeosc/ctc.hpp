#pragma once

#include <span>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::train {

inline constexpr int kBlank = 0;

struct CtcResult {
  double loss = 0.0;  // -log p(target | lattice)
  MatrixD grad;       // dLoss / dLogprob, same shape as the lattice (empty if not requested)
};

/// Minimum number of frames needed to emit `target` (labels plus one blank
/// between each pair of repeated labels).
std::size_t ctc_min_frames(std::span<const int> target) noexcept;

/// Connectionist temporal classification loss by the log-space forward-backward
/// recursion. Throws Errc::infeasible_target when the lattice is too short and
/// Errc::invalid_parameter for out-of-range or blank labels.
CtcResult ctc_loss(const MatrixD& logprobs, std::span<const int> target, bool want_grad = true,
                   int blank = kBlank);

/// Per-frame argmax, collapse repeats, drop blanks.
std::vector<int> ctc_greedy_decode(const MatrixD& logprobs, int blank = kBlank);

/// Levenshtein distance between label sequences.
std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

}  // namespace spikeosc::train
