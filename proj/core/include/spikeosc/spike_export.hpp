#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikeosc/tensor.hpp"

namespace spikeosc::io {

inline constexpr char kSpikeMagic[8] = {'S', 'P', 'K', 'O', 'S', 'P', 'K', 'E'};
inline constexpr std::uint32_t kSpikeVersion = 1;

// Per-layer spike rasters of a set of utterances.
struct SpikeExport {
  std::uint64_t config_hash = 0;
  double dt_ms = 2.0;
  std::vector<std::size_t> layer_sizes;
  std::vector<std::string> utterance_ids;
  std::vector<std::vector<Matrix<std::uint8_t>>> rasters;  // [utterance][layer], T x N

  std::size_t total_spikes() const;
  friend bool operator==(const SpikeExport&, const SpikeExport&) = default;
};

std::vector<std::uint8_t> encode_spikes(const SpikeExport& data);
SpikeExport decode_spikes(std::span<const std::uint8_t> bytes);

void save_spikes(const std::filesystem::path& path, const SpikeExport& data);
/// Throws Errc::hash_mismatch when `expected_hash` is given and differs.
SpikeExport load_spikes(const std::filesystem::path& path,
                        std::optional<std::uint64_t> expected_hash = std::nullopt);

}  // namespace spikeosc::io
