#include "spikeosc/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spikeosc/errors.hpp"

namespace spikeosc::train {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

std::size_t ctc_min_frames(std::span<const int> target) noexcept {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++n;
  }
  return n;
}

CtcResult ctc_loss(const MatrixD& logprobs, std::span<const int> target, bool want_grad,
                   int blank) {
  const std::size_t T = logprobs.rows();
  const auto K = static_cast<int>(logprobs.cols());
  for (int c : target) {
    if (c < 0 || c >= K || c == blank) {
      throw Error(Errc::invalid_parameter, "target label " + std::to_string(c) +
                                               " is out of range or equals the blank");
    }
  }
  if (T == 0 || ctc_min_frames(target) > T) {
    throw Error(Errc::infeasible_target, "target of length " + std::to_string(target.size()) +
                                             " cannot be aligned to " + std::to_string(T) +
                                             " frames");
  }
  // Extended label sequence with blanks interleaved: b l1 b l2 ... b
  const std::size_t S = 2 * target.size() + 1;
  std::vector<int> ext(S, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  const auto can_skip = [&](std::size_t s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  MatrixD alpha(T, S, kNegInf);
  alpha(0, 0) = logprobs(0, ext[0]);
  if (S > 1) alpha(0, 1) = logprobs(0, ext[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kNegInf ? kNegInf : a + logprobs(t, ext[s]);
    }
  }
  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = log_add(log_p, alpha(T - 1, S - 2));
  if (log_p == kNegInf) {
    throw Error(Errc::infeasible_target, "no alignment has nonzero probability");
  }

  CtcResult result;
  result.loss = -log_p;
  if (!want_grad) return result;

  // beta(t, s): log probability of completing from (t, s), excluding frame t's emission.
  MatrixD beta(T, S, kNegInf);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + logprobs(t + 1, ext[s]);
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1) + logprobs(t + 1, ext[s + 1]));
      if (s + 2 < S && can_skip(s + 2)) {
        b = log_add(b, beta(t + 1, s + 2) + logprobs(t + 1, ext[s + 2]));
      }
      beta(t, s) = b;
    }
  }
  result.grad = MatrixD(T, static_cast<std::size_t>(K));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double occ = alpha(t, s) + beta(t, s) - log_p;
      if (occ == kNegInf) continue;
      result.grad(t, static_cast<std::size_t>(ext[s])) -= std::exp(occ);
    }
  }
  return result;
}

std::vector<int> ctc_greedy_decode(const MatrixD& logprobs, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (std::size_t t = 0; t < logprobs.rows(); ++t) {
    const auto row = logprobs.row(t);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != prev && best != blank) out.push_back(best);
    prev = best;
  }
  return out;
}

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace spikeosc::train
