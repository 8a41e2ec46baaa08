#include "spikeosc/errors.hpp"

namespace spikeosc {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::invalid_timestep: return "invalid-timestep";
    case Errc::degenerate_kernel: return "degenerate-kernel";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::numeric_overflow: return "numeric-overflow";
    case Errc::too_short: return "too-short";
    case Errc::invalid_band: return "invalid-band";
    case Errc::degenerate_signal: return "degenerate-signal";
    case Errc::degenerate_surrogate: return "degenerate-surrogate";
    case Errc::infeasible_target: return "infeasible-target";
    case Errc::divergence: return "divergence";
    case Errc::config: return "config";
    case Errc::format: return "format";
    case Errc::hash_mismatch: return "hash-mismatch";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace spikeosc
