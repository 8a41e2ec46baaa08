#include "spikeosc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "spikeosc/errors.hpp"
#include "spikeosc/filters.hpp"
#include "spikeosc/readout.hpp"

namespace spikeosc {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(Errc::config, key + " " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad(key, "expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) bad(key, "expects a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string l = v;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  bad(key, "expects true or false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

Task to_task(const std::string& key, const std::string& v) {
  if (v == "phoneme-ctc") return Task::phoneme_ctc;
  if (v == "command-classify") return Task::command_classify;
  if (v == "synthetic") return Task::synthetic;
  bad(key, "must be one of phoneme-ctc, command-classify, synthetic");
}

struct Entry {
  const char* key;
  bool hashed;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SPK_DOUBLE(name, hashed)                                                             \
  Entry{#name, hashed, [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.name); }}
#define SPK_SIZE(name, hashed)                                                                \
  Entry{#name, hashed,                                                                        \
        [](ExperimentConfig& c, const std::string& v) {                                       \
          c.name = static_cast<std::size_t>(to_uint(#name, v));                              \
        },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define SPK_BOOL(name, hashed)                                                              \
  Entry{#name, hashed, [](ExperimentConfig& c, const std::string& v) { c.name = to_bool(#name, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"task", true, [](ExperimentConfig& c, const std::string& v) { c.task = to_task("task", v); },
            [](const ExperimentConfig& c) { return to_string(c.task); }},
      Entry{"seed", true, [](ExperimentConfig& c, const std::string& v) { c.seed = to_uint("seed", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      SPK_DOUBLE(dt_ms, true),
      SPK_SIZE(n_layers, true),
      SPK_SIZE(neurons_per_layer, true),
      SPK_DOUBLE(sfa_fraction, true),
      SPK_DOUBLE(ff_connectivity, true),
      SPK_DOUBLE(rec_connectivity, true),
      SPK_BOOL(dale_enabled, true),
      SPK_DOUBLE(excitatory_fraction, true),
      Entry{"weight_init", true,
            [](ExperimentConfig& c, const std::string& v) { c.weight_init = v; },
            [](const ExperimentConfig& c) { return c.weight_init; }},
      SPK_DOUBLE(init_rate_hz, true),
      SPK_BOOL(strict_stability, true),
      SPK_SIZE(cnn_channels, true),
      SPK_DOUBLE(cnn_dropout, true),
      SPK_BOOL(layer_norm, true),
      SPK_SIZE(readout_hidden, true),
      SPK_DOUBLE(reg_weight, true),
      SPK_DOUBLE(f_min_hz, true),
      SPK_DOUBLE(f_max_hz, true),
      SPK_BOOL(reset_gradient, true),
      SPK_SIZE(epochs, true),
      SPK_SIZE(batch_size, true),
      SPK_DOUBLE(learning_rate, true),
      SPK_DOUBLE(weight_decay, true),
      SPK_DOUBLE(grad_clip, true),
      SPK_SIZE(n_train, true),
      SPK_SIZE(n_val, true),
      SPK_SIZE(n_test, true),
      SPK_DOUBLE(utterance_s, true),
      Entry{"pac_depths", true,
            [](ExperimentConfig& c, const std::string& v) {
              c.pac_depths.clear();
              for (const auto& s : to_list(v)) c.pac_depths.push_back(to_double("pac_depths", s));
            },
            [](const ExperimentConfig& c) { return join(c.pac_depths); }},
      Entry{"simulate_input", false,
            [](ExperimentConfig& c, const std::string& v) { c.simulate_input = v; },
            [](const ExperimentConfig& c) { return c.simulate_input; }},
      SPK_SIZE(top_k, false),
      Entry{"analysis_low_bands", false,
            [](ExperimentConfig& c, const std::string& v) { c.analysis_low_bands = to_list(v); },
            [](const ExperimentConfig& c) { return join(c.analysis_low_bands); }},
      Entry{"analysis_high_bands", false,
            [](ExperimentConfig& c, const std::string& v) { c.analysis_high_bands = to_list(v); },
            [](const ExperimentConfig& c) { return join(c.analysis_high_bands); }},
      SPK_SIZE(n_surrogates, false),
      SPK_SIZE(n_bins, false),
      SPK_SIZE(report_utterance, false),
      SPK_SIZE(report_layer, false),
      SPK_SIZE(threads, false),
      Entry{"output_dir", false,
            [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
            [](const ExperimentConfig& c) { return c.output_dir.string(); }},
  };
  return table;
}

#undef SPK_DOUBLE
#undef SPK_SIZE
#undef SPK_BOOL

void check_fraction(const std::string& key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) bad(key, "must be in [0, 1], got " + fmt(v));
}

void check_at_least(const std::string& key, std::size_t v, std::size_t lo) {
  if (v < lo) bad(key, "must be at least " + std::to_string(lo) + ", got " + std::to_string(v));
}

void check_nonneg(const std::string& key, double v) {
  if (!(v >= 0.0)) bad(key, "must be >= 0, got " + fmt(v));
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::phoneme_ctc: return "phoneme-ctc";
    case Task::command_classify: return "command-classify";
    case Task::synthetic: return "synthetic";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (dt_ms != 1.0 && dt_ms != 2.0 && dt_ms != 5.0) {
    throw Error(Errc::config, "dt_ms must be one of 1, 2, 5");
  }
  check_at_least("n_layers", n_layers, 1);
  check_at_least("neurons_per_layer", neurons_per_layer, 1);
  check_fraction("sfa_fraction", sfa_fraction);
  check_fraction("ff_connectivity", ff_connectivity);
  check_fraction("rec_connectivity", rec_connectivity);
  check_fraction("excitatory_fraction", excitatory_fraction);
  if (weight_init != "fluctuation" && weight_init != "fan-in") {
    bad("weight_init", "must be fluctuation or fan-in, got " + weight_init);
  }
  if (!(init_rate_hz > 0.0)) bad("init_rate_hz", "must be positive, got " + fmt(init_rate_hz));
  check_at_least("cnn_channels", cnn_channels, 1);
  if (!(cnn_dropout >= 0.0 && cnn_dropout < 1.0)) bad("cnn_dropout", "must be in [0, 1)");
  check_at_least("readout_hidden", readout_hidden, 1);
  check_nonneg("reg_weight", reg_weight);
  check_nonneg("f_min_hz", f_min_hz);
  const double nyquist = 500.0 / dt_ms;
  if (f_max_hz != 0.0 && !(f_max_hz > f_min_hz)) {
    bad("f_max_hz", "must be 0 (Nyquist) or greater than f_min_hz");
  }
  if (f_max_hz == 0.0 && !(f_min_hz < nyquist)) bad("f_min_hz", "must be below the Nyquist frequency");
  check_at_least("batch_size", batch_size, 1);
  check_nonneg("learning_rate", learning_rate);
  check_nonneg("weight_decay", weight_decay);
  check_nonneg("grad_clip", grad_clip);
  check_at_least("n_train", n_train, 1);
  check_at_least("n_val", n_val, 1);
  check_at_least("n_test", n_test, 1);
  if (!(utterance_s > 0.0 && utterance_s <= 600.0)) bad("utterance_s", "must be in (0, 600]");
  if (pac_depths.empty()) bad("pac_depths", "needs at least one value");
  for (double d : pac_depths) check_fraction("pac_depths", d);
  static const std::vector<std::string> inputs{"test", "silence", "noise-uniform", "noise-babble",
                                               "noise-stationary"};
  if (std::find(inputs.begin(), inputs.end(), simulate_input) == inputs.end()) {
    bad("simulate_input",
        "must be one of test, silence, noise-uniform, noise-babble, noise-stationary");
  }
  const double fs = 1000.0 / dt_ms;
  auto check_bands = [&](const char* key, const std::vector<std::string>& names) {
    if (names.empty()) bad(key, "needs at least one band");
    for (const auto& n : names) {
      const osc::FrequencyBand* band = nullptr;
      try {
        band = &osc::band_by_name(n);
      } catch (const Error&) {
        bad(key, "has unknown band '" + n +
                     "' (valid: delta, theta, alpha, beta, low-gamma, high-gamma)");
      }
      if (!(band->hi < fs / 2.0)) {
        bad(key, "band " + n + " reaches " + fmt(band->hi) + " Hz, above the " + fmt(fs / 2.0) +
                     " Hz Nyquist frequency of dt_ms=" + fmt(dt_ms));
      }
    }
  };
  check_bands("analysis_low_bands", analysis_low_bands);
  check_bands("analysis_high_bands", analysis_high_bands);
  check_at_least("n_surrogates", n_surrogates, 2);
  check_at_least("n_bins", n_bins, 2);
  check_at_least("threads", threads, 1);
  if (report_layer > n_layers) {
    bad("report_layer", "must be in [0, " + std::to_string(n_layers) + "]");
  }
}

train::ModelConfig ExperimentConfig::model_config(std::size_t n_outputs) const {
  train::ModelConfig m;
  m.dt_ms = dt_ms;
  m.cnn_channels = cnn_channels;
  net::LayerSpec spec;
  spec.n_neurons = neurons_per_layer;
  spec.sfa_fraction = sfa_fraction;
  spec.ff_connectivity = ff_connectivity;
  spec.rec_connectivity = rec_connectivity;
  spec.dale_enabled = dale_enabled;
  spec.excitatory_fraction = excitatory_fraction;
  spec.init = weight_init == "fan-in" ? net::WeightInit::fan_in : net::WeightInit::fluctuation;
  spec.init_rate_hz = init_rate_hz;
  m.layers.assign(n_layers, spec);
  m.readout.pool_factor = train::ReadoutConfig::pool_for_dt(dt_ms);
  m.readout.hidden = readout_hidden;
  m.readout.n_outputs = n_outputs;
  m.cnn.dropout = cnn_dropout;
  m.cnn.layer_norm = layer_norm;
  m.reg_weight = reg_weight;
  m.f_min_hz = f_min_hz;
  m.f_max_hz = f_max_hz;
  m.reset_gradient = reset_gradient;
  m.strict_stability = strict_stability;
  return m;
}

std::string ExperimentConfig::canonical_text() const {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& e : entries()) kv.emplace_back(e.key, e.get(*this));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& e : entries()) {
    if (e.hashed) kv.emplace_back(e.key, e.get(*this));
  }
  std::sort(kv.begin(), kv.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : kv) {
    for (unsigned char c : k + "=" + v + "\n") {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(config, value);
      return;
    }
  }
  throw Error(Errc::config, "unknown key '" + key + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.key);
  return out;
}

ExperimentConfig parse_config(const std::string& text, bool apply_environment) {
  ExperimentConfig config;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (apply_environment) {
    for (const auto& e : entries()) {
      std::string var = "SPIKEOSC_";
      for (const char* p = e.key; *p; ++p) var += static_cast<char>(std::toupper(*p));
      if (const char* v = std::getenv(var.c_str())) e.set(config, trim(v));
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool apply_environment) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), apply_environment);
}

}  // namespace spikeosc
