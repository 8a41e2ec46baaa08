#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spikeosc/model.hpp"

namespace spikeosc::io {

inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'K', 'O', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t config_hash = 0;
  train::Model model;
};

/// Serialises dimensions, bit-packed masks, little-endian float32 weights and
/// neuron parameters, Dale signs, CNN and readout. Encoding a decoded
/// checkpoint reproduces the input bytes.
std::vector<std::uint8_t> encode_checkpoint(const train::Model& model, std::uint64_t config_hash);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const train::Model& model,
                     std::uint64_t config_hash);

/// Throws Errc::hash_mismatch when `expected_hash` is given and differs.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_hash = std::nullopt);

}  // namespace spikeosc::io
