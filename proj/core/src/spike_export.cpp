#include "spikeosc/spike_export.hpp"

#include <string_view>

#include "binary_io.hpp"

namespace spikeosc::io {

namespace {
constexpr std::string_view kMagic(kSpikeMagic, sizeof kSpikeMagic);
}

std::size_t SpikeExport::total_spikes() const {
  std::size_t n = 0;
  for (const auto& utt : rasters) {
    for (const auto& layer : utt) {
      for (auto v : layer.data()) n += v != 0;
    }
  }
  return n;
}

std::vector<std::uint8_t> encode_spikes(const SpikeExport& data) {
  if (data.rasters.size() != data.utterance_ids.size()) {
    throw Error(Errc::shape_mismatch, "one raster set per utterance id expected");
  }
  detail::ByteWriter w;
  w.tag(kMagic);
  w.u32(kSpikeVersion);
  w.u64(data.config_hash);
  w.f64(data.dt_ms);
  w.u32(static_cast<std::uint32_t>(data.layer_sizes.size()));
  for (auto n : data.layer_sizes) w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(data.utterance_ids.size()));
  for (std::size_t u = 0; u < data.rasters.size(); ++u) {
    const auto& layers = data.rasters[u];
    if (layers.size() != data.layer_sizes.size()) {
      throw Error(Errc::shape_mismatch, "utterance " + data.utterance_ids[u] + " has " +
                                            std::to_string(layers.size()) + " layers");
    }
    const std::size_t T = layers.empty() ? 0 : layers.front().rows();
    w.str(data.utterance_ids[u]);
    w.u32(static_cast<std::uint32_t>(T));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (layers[l].rows() != T || layers[l].cols() != data.layer_sizes[l]) {
        throw Error(Errc::shape_mismatch, "raster shape differs from header in utterance " +
                                              data.utterance_ids[u]);
      }
      std::vector<std::uint8_t> bits(layers[l].size());
      for (std::size_t i = 0; i < bits.size(); ++i) {
        const auto v = layers[l].data()[i];
        if (v > 1) throw Error(Errc::format, "spike rasters must be binary");
        bits[i] = v;
      }
      w.bits(std::span<const std::uint8_t>(bits));
    }
  }
  return std::move(w.buffer());
}

SpikeExport decode_spikes(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_tag(kMagic, "spike export");
  const auto version = r.u32();
  if (version != kSpikeVersion) {
    throw Error(Errc::format, "unsupported spike export version " + std::to_string(version));
  }
  SpikeExport out;
  out.config_hash = r.u64();
  out.dt_ms = r.f64();
  const std::size_t L = r.u32();
  r.need(4 * L);
  for (std::size_t l = 0; l < L; ++l) out.layer_sizes.push_back(r.u32());
  const std::size_t U = r.u32();
  if (U > r.remaining()) throw Error(Errc::format, "implausible utterance count");
  for (std::size_t u = 0; u < U; ++u) {
    out.utterance_ids.push_back(r.str());
    const std::size_t T = r.u32();
    std::vector<Matrix<std::uint8_t>> layers;
    for (std::size_t l = 0; l < L; ++l) {
      r.need((T * out.layer_sizes[l] + 7) / 8);
      Matrix<std::uint8_t> m(T, out.layer_sizes[l]);
      r.bits(std::span<std::uint8_t>(m.data()));
      layers.push_back(std::move(m));
    }
    out.rasters.push_back(std::move(layers));
  }
  if (!r.done()) throw Error(Errc::format, "trailing bytes after spike export");
  return out;
}

void save_spikes(const std::filesystem::path& path, const SpikeExport& data) {
  detail::write_file(path, encode_spikes(data));
}

SpikeExport load_spikes(const std::filesystem::path& path,
                        std::optional<std::uint64_t> expected_hash) {
  SpikeExport data = decode_spikes(detail::read_file(path));
  if (expected_hash && *expected_hash != data.config_hash) {
    throw Error(Errc::hash_mismatch, path.string() + " was produced by a different configuration");
  }
  return data;
}

}  // namespace spikeosc::io
