#include "spikeosc/population.hpp"

#include <cmath>
#include <string>

#include "spikeosc/errors.hpp"

namespace spikeosc::osc {

namespace {

PopulationSignal finish(std::vector<std::uint32_t> raw, double dt_ms, std::size_t layer_id) {
  if (raw.size() < 2) throw Error(Errc::too_short, "population signal needs at least 2 steps");
  if (!(dt_ms > 0.0)) throw Error(Errc::invalid_timestep, "dt must be positive");
  PopulationSignal p;
  p.fs = 1000.0 / dt_ms;
  p.layer_id = layer_id;
  const double n = static_cast<double>(raw.size());
  double mean = 0.0;
  for (auto v : raw) mean += v;
  mean /= n;
  double var = 0.0;
  for (auto v : raw) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  bool constant = true;
  for (auto v : raw) constant = constant && v == raw.front();
  if (constant || !(sd > 0.0)) {
    throw Error(Errc::degenerate_signal,
                "layer " + std::to_string(layer_id) + " population signal is constant");
  }
  p.normalized.resize(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) p.normalized[t] = (raw[t] - mean) / sd;
  p.raw = std::move(raw);
  return p;
}

}  // namespace

PopulationSignal population_signal(const Matrix<std::uint8_t>& raster, double dt_ms,
                                   std::size_t layer_id) {
  std::vector<std::uint32_t> raw(raster.rows(), 0);
  for (std::size_t t = 0; t < raster.rows(); ++t) {
    for (auto s : raster.row(t)) raw[t] += s != 0;
  }
  return finish(std::move(raw), dt_ms, layer_id);
}

PopulationSignal population_signal(const MatrixD& raster, double dt_ms, std::size_t layer_id) {
  std::vector<std::uint32_t> raw(raster.rows(), 0);
  for (std::size_t t = 0; t < raster.rows(); ++t) {
    for (double s : raster.row(t)) raw[t] += s != 0.0;
  }
  return finish(std::move(raw), dt_ms, layer_id);
}

PopulationSignal population_signal(const SpikeTensor& spikes, std::size_t item,
                                   std::size_t layer_id) {
  if (item >= spikes.batch) throw Error(Errc::shape_mismatch, "batch item out of range");
  std::vector<std::uint32_t> raw(spikes.time, 0);
  for (std::size_t t = 0; t < spikes.time; ++t) {
    for (std::size_t n = 0; n < spikes.neurons; ++n) raw[t] += spikes.at(item, t, n) != 0;
  }
  return finish(std::move(raw), spikes.dt_ms, layer_id);
}

}  // namespace spikeosc::osc
