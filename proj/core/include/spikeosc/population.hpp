#pragma once

#include <cstdint>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::osc {

// Per-layer spike count over time and its z-scored version (EEG analogue).
struct PopulationSignal {
  std::vector<std::uint32_t> raw;
  std::vector<double> normalized;
  double fs = 500.0;  // Hz
  std::size_t layer_id = 0;
};

/// Sums a T x N raster over neurons and z-scores it with the population
/// standard deviation. Throws Errc::degenerate_signal for a constant count and
/// Errc::too_short for T < 2.
PopulationSignal population_signal(const Matrix<std::uint8_t>& raster, double dt_ms,
                                   std::size_t layer_id);
PopulationSignal population_signal(const MatrixD& raster, double dt_ms, std::size_t layer_id);
PopulationSignal population_signal(const SpikeTensor& spikes, std::size_t item,
                                   std::size_t layer_id);

}  // namespace spikeosc::osc
