#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikeosc {

enum class Errc {
  invalid_parameter,
  invalid_timestep,
  degenerate_kernel,
  shape_mismatch,
  numeric_overflow,
  too_short,
  invalid_band,
  degenerate_signal,
  degenerate_surrogate,
  infeasible_target,
  divergence,
  config,
  format,
  hash_mismatch,
  io,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported through this type; `code()` identifies
// the failure class and `what()` carries a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spikeosc
