#include "spikeosc/checkpoint.hpp"

#include <string_view>

#include "binary_io.hpp"

namespace spikeosc::io {

namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr std::string_view kMagic(kCheckpointMagic, sizeof kCheckpointMagic);

void put_matrix(ByteWriter& w, const MatrixD& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  w.f32s(m.data());
}

MatrixD get_matrix(ByteReader& r) {
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  r.need(rows * cols * 4);
  MatrixD m(rows, cols);
  r.f32s(m.data());
  return m;
}

void put_vector(ByteWriter& w, const std::vector<double>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.f32s(v);
}

std::vector<double> get_vector(ByteReader& r) {
  const std::size_t n = r.u32();
  r.need(n * 4);
  std::vector<double> v(n);
  r.f32s(v);
  return v;
}

void put_mask(ByteWriter& w, const Matrix<std::uint8_t>& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  w.bits(std::span<const std::uint8_t>(m.data()));
}

Matrix<std::uint8_t> get_mask(ByteReader& r) {
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  Matrix<std::uint8_t> m(rows, cols);
  r.bits(std::span<std::uint8_t>(m.data()));
  return m;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const train::Model& model, std::uint64_t config_hash) {
  ByteWriter w;
  w.tag(kMagic);
  w.u32(kCheckpointVersion);
  w.u64(config_hash);

  const auto& c = model.config;
  w.f64(c.dt_ms);
  w.u32(static_cast<std::uint32_t>(c.n_mels));
  w.u32(static_cast<std::uint32_t>(c.cnn_channels));
  w.f64(c.reg_weight);
  w.f64(c.f_min_hz);
  w.f64(c.f_max_hz);
  w.u8(c.reset_gradient);
  w.u8(c.strict_stability);
  w.u8(c.cnn.layer_norm);
  w.f64(c.cnn.dropout);
  w.f64(c.cnn.leaky_slope);
  w.f64(c.cnn.norm_epsilon);
  w.u32(static_cast<std::uint32_t>(c.layers.size()));
  for (const auto& s : c.layers) {
    w.u32(static_cast<std::uint32_t>(s.n_neurons));
    w.f64(s.sfa_fraction);
    w.f64(s.ff_connectivity);
    w.f64(s.rec_connectivity);
    w.u8(s.dale_enabled);
    w.f64(s.excitatory_fraction);
  }

  const auto& cnn = model.cnn;
  w.u32(static_cast<std::uint32_t>(cnn.channels));
  w.u32(static_cast<std::uint32_t>(cnn.n_mels));
  put_vector(w, cnn.kernels);
  put_vector(w, cnn.bias);
  put_vector(w, cnn.ln_gain);
  put_vector(w, cnn.ln_bias);

  const auto& topo = model.topology;
  w.f64(topo.dt_ms);
  w.u8(topo.dale_enabled);
  w.u8(topo.strict_stability);
  w.u32(static_cast<std::uint32_t>(topo.layers.size()));
  for (const auto& l : topo.layers) {
    w.u8(l.nerve);
    w.u32(static_cast<std::uint32_t>(l.n_in));
    w.u32(static_cast<std::uint32_t>(l.n));
    put_mask(w, l.W_mask);
    put_mask(w, l.V_mask);
    w.u32(static_cast<std::uint32_t>(l.sfa_mask.size()));
    w.bits(std::span<const std::uint8_t>(l.sfa_mask));
    w.u32(static_cast<std::uint32_t>(l.dale_signs.size()));
    std::vector<std::uint8_t> positive(l.dale_signs.size());
    for (std::size_t i = 0; i < positive.size(); ++i) positive[i] = l.dale_signs[i] > 0;
    w.bits(std::span<const std::uint8_t>(positive));
    put_matrix(w, l.W);
    put_matrix(w, l.V);
    put_vector(w, l.params.tau_u);
    put_vector(w, l.params.tau_w);
    put_vector(w, l.params.a);
    put_vector(w, l.params.b);
  }

  const auto& r = model.readout;
  w.u32(static_cast<std::uint32_t>(r.config.pool_factor));
  w.u32(static_cast<std::uint32_t>(r.config.hidden));
  w.u32(static_cast<std::uint32_t>(r.config.n_outputs));
  w.f64(r.config.leaky_slope);
  w.u32(static_cast<std::uint32_t>(r.n_in));
  put_matrix(w, r.W1);
  put_matrix(w, r.W2);
  put_matrix(w, r.W3);
  put_vector(w, r.b1);
  put_vector(w, r.b2);
  put_vector(w, r.b3);
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag(kMagic, "checkpoint");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(Errc::format, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_hash = r.u64();
  auto& m = ck.model;
  auto& c = m.config;
  c.dt_ms = r.f64();
  c.n_mels = r.u32();
  c.cnn_channels = r.u32();
  c.reg_weight = r.f64();
  c.f_min_hz = r.f64();
  c.f_max_hz = r.f64();
  c.reset_gradient = r.u8() != 0;
  c.strict_stability = r.u8() != 0;
  c.cnn.layer_norm = r.u8() != 0;
  c.cnn.dropout = r.f64();
  c.cnn.leaky_slope = r.f64();
  c.cnn.norm_epsilon = r.f64();
  c.layers.resize(r.u32());
  for (auto& s : c.layers) {
    s.n_neurons = r.u32();
    s.sfa_fraction = r.f64();
    s.ff_connectivity = r.f64();
    s.rec_connectivity = r.f64();
    s.dale_enabled = r.u8() != 0;
    s.excitatory_fraction = r.f64();
  }

  auto& cnn = m.cnn;
  cnn.channels = r.u32();
  cnn.n_mels = r.u32();
  cnn.kernels = get_vector(r);
  cnn.bias = get_vector(r);
  cnn.ln_gain = get_vector(r);
  cnn.ln_bias = get_vector(r);

  auto& topo = m.topology;
  topo.dt_ms = r.f64();
  topo.dale_enabled = r.u8() != 0;
  topo.strict_stability = r.u8() != 0;
  const std::size_t n_layers = r.u32();
  if (n_layers > r.remaining()) throw Error(Errc::format, "implausible layer count");
  topo.layers.resize(n_layers);
  for (auto& l : topo.layers) {
    l.nerve = r.u8() != 0;
    l.n_in = r.u32();
    l.n = r.u32();
    l.W_mask = get_mask(r);
    l.V_mask = get_mask(r);
    l.sfa_mask.resize(r.u32());
    r.bits(std::span<std::uint8_t>(l.sfa_mask));
    std::vector<std::uint8_t> positive(r.u32());
    r.bits(std::span<std::uint8_t>(positive));
    l.dale_signs.resize(positive.size());
    for (std::size_t i = 0; i < positive.size(); ++i) l.dale_signs[i] = positive[i] ? 1 : -1;
    l.W = get_matrix(r);
    l.V = get_matrix(r);
    l.params.tau_u = get_vector(r);
    l.params.tau_w = get_vector(r);
    l.params.a = get_vector(r);
    l.params.b = get_vector(r);
    if (l.params.tau_u.size() != l.n || l.params.tau_w.size() != l.n ||
        l.params.a.size() != l.n || l.params.b.size() != l.n) {
      throw Error(Errc::format, "neuron parameter count differs from layer size");
    }
  }

  auto& ro = m.readout;
  ro.config.pool_factor = r.u32();
  ro.config.hidden = r.u32();
  ro.config.n_outputs = r.u32();
  ro.config.leaky_slope = r.f64();
  ro.n_in = r.u32();
  ro.W1 = get_matrix(r);
  ro.W2 = get_matrix(r);
  ro.W3 = get_matrix(r);
  ro.b1 = get_vector(r);
  ro.b2 = get_vector(r);
  ro.b3 = get_vector(r);
  c.readout = ro.config;
  if (!r.done()) throw Error(Errc::format, "trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const train::Model& model,
                     std::uint64_t config_hash) {
  detail::write_file(path, encode_checkpoint(model, config_hash));
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_hash) {
  Checkpoint ck = decode_checkpoint(detail::read_file(path));
  if (expected_hash && *expected_hash != ck.config_hash) {
    throw Error(Errc::hash_mismatch, path.string() + " was produced by a different configuration");
  }
  return ck;
}

}  // namespace spikeosc::io
