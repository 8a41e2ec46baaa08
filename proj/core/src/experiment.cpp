#include "spikeosc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

#include <json.hpp>

#include "parallel.hpp"
#include "spikeosc/checkpoint.hpp"
#include "spikeosc/errors.hpp"
#include "spikeosc/filters.hpp"
#include "spikeosc/population.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::exp {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum : std::uint64_t {
  kSeedDataset = 21,
  kSeedModel = 31,
  kSeedShuffle = 32,
  kSeedStep = 33,
  kSeedSynthetic = 41,
  kSeedNoise = 42,
  kSeedScan = 51,
};

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::io, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(Errc::io, "short write to " + path.string());
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::io, "missing input file: " + path.string());
}

bool is_classification(Task t) { return t == Task::command_classify; }

}  // namespace

data::AudioDataset task_dataset(const ExperimentConfig& config) {
  const data::SplitSizes sizes{config.n_train, config.n_val, config.n_test};
  const auto seed = derive_seed(config.seed, {kSeedDataset});
  switch (config.task) {
    case Task::phoneme_ctc: return data::tone_sequences(seed, sizes);
    case Task::command_classify: return data::am_commands(seed, sizes);
    case Task::synthetic: break;
  }
  throw Error(Errc::config, "task synthetic has no audio dataset");
}

train::Model initial_model(const ExperimentConfig& config, std::size_t n_outputs) {
  return train::Model::initialise(config.model_config(n_outputs),
                                  derive_seed(config.seed, {kSeedModel}));
}

TrainResult run_train(const ExperimentConfig& config, std::ostream* progress) {
  if (config.task == Task::synthetic) {
    throw Error(Errc::config, "task synthetic has no training stage; use simulate");
  }
  const auto ds = task_dataset(config);
  const auto train_set = data::to_examples(ds.train, config.dt_ms);
  const auto val_set = data::to_examples(ds.val, config.dt_ms);
  const bool classification = is_classification(config.task);

  train::Model model = initial_model(config, ds.n_outputs);
  train::AdamWOptions opt;
  opt.learning_rate = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  opt.grad_clip = config.grad_clip;
  train::AdamW optimizer(opt);
  const train::StepOptions step_opts{net::SpikeFunction::heaviside, config.threads};

  TrainResult result;
  result.checkpoint = config.output_dir / "checkpoint.bin";
  result.log = config.output_dir / "train_log.jsonl";
  fs::create_directories(config.output_dir);
  std::ofstream log(result.log, std::ios::binary | std::ios::trunc);
  if (!log) throw Error(Errc::io, "cannot write " + result.log.string());

  const std::uint64_t hash = config.hash();
  double best = -std::numeric_limits<double>::infinity();
  if (config.epochs == 0) io::save_checkpoint(result.checkpoint, model, hash);

  std::vector<std::size_t> order(train_set.size());
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(derive_seed(config.seed, {kSeedShuffle, epoch}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    EpochLog entry;
    entry.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      std::vector<train::Example> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) {
        batch.push_back(train_set[order[i]]);
      }
      train::LossBreakdown loss;
      try {
        loss = train::train_step(model, optimizer, batch, derive_seed(config.seed, {kSeedStep, step}),
                                 step_opts);
      } catch (const Error& e) {
        if (e.code() != Errc::divergence) throw;
        throw Error(Errc::divergence, "epoch " + std::to_string(epoch) + ", batch " +
                                          std::to_string(b / config.batch_size) + ": " + e.what());
      }
      ++step;
      const double w = static_cast<double>(batch.size());
      entry.ctc += loss.ctc * w;
      entry.reg += loss.reg * w;
      entry.total += loss.total * w;
      entry.mean_firing_rate_hz += loss.mean_firing_rate_hz * w;
      seen += batch.size();
    }
    const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(seen, 1));
    entry.ctc *= inv;
    entry.reg *= inv;
    entry.total *= inv;
    entry.mean_firing_rate_hz *= inv;

    const auto ev = train::evaluate(model, val_set, classification, step_opts);
    entry.val_metric = classification ? ev.accuracy : ev.token_error_rate;
    const double score = classification ? ev.accuracy : -ev.token_error_rate;
    ordered_json line{{"epoch", entry.epoch},
                      {"ctc", entry.ctc},
                      {"reg", entry.reg},
                      {"total", entry.total},
                      {"mean_firing_rate_hz", entry.mean_firing_rate_hz},
                      {"val_metric", entry.val_metric}};
    log << line.dump() << '\n';
    log.flush();
    if (progress) *progress << line.dump() << '\n';
    result.epochs.push_back(entry);
    if (score > best) {
      best = score;
      result.best_epoch = epoch;
      result.best_val_metric = entry.val_metric;
      io::save_checkpoint(result.checkpoint, model, hash);
    }
  }
  return result;
}

io::SpikeExport simulate_examples(const train::Model& model, std::span<const train::Example> examples,
                                  std::uint64_t config_hash, std::size_t threads) {
  io::SpikeExport out;
  out.config_hash = config_hash;
  out.dt_ms = model.topology.dt_ms;
  out.layer_sizes = model.topology.layer_sizes();
  out.utterance_ids.resize(examples.size());
  out.rasters.resize(examples.size());
  detail::parallel_for(examples.size(), threads, [&](std::size_t i) {
    const auto pass = train::forward(model, examples[i].features, nullptr, {});
    out.utterance_ids[i] = examples[i].id;
    for (const auto& tr : pass.layers) {
      Matrix<std::uint8_t> r(tr.s.rows(), tr.s.cols());
      for (std::size_t k = 0; k < r.size(); ++k) r.data()[k] = tr.s.data()[k] != 0.0;
      out.rasters[i].push_back(std::move(r));
    }
  });
  return out;
}

RateHistogram rate_histogram(const io::SpikeExport& spikes, double bin_width_hz) {
  RateHistogram h;
  h.bin_width_hz = bin_width_hz;
  const double max_rate = 1000.0 / spikes.dt_ms;
  const auto n_bins = static_cast<std::size_t>(std::ceil(max_rate / bin_width_hz)) + 1;
  const std::size_t L = spikes.layer_sizes.size();
  h.counts.assign(L, std::vector<std::size_t>(n_bins, 0));
  h.mean_rate_hz.assign(L, 0.0);
  std::vector<std::size_t> n(L, 0);
  for (const auto& utt : spikes.rasters) {
    for (std::size_t l = 0; l < L; ++l) {
      const auto& r = utt[l];
      const double dur = static_cast<double>(r.rows()) * spikes.dt_ms / 1000.0;
      if (dur <= 0.0) continue;
      for (std::size_t j = 0; j < r.cols(); ++j) {
        std::size_t c = 0;
        for (std::size_t t = 0; t < r.rows(); ++t) c += r(t, j);
        const double rate = static_cast<double>(c) / dur;
        const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(rate / bin_width_hz));
        ++h.counts[l][bin];
        h.mean_rate_hz[l] += rate;
        ++n[l];
      }
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (n[l]) h.mean_rate_hz[l] /= static_cast<double>(n[l]);
  }
  return h;
}

SimulateResult run_simulate(const ExperimentConfig& config, const std::optional<fs::path>& checkpoint,
                            bool untrained) {
  SimulateResult result;
  const std::uint64_t hash = config.hash();
  if (config.task == Task::synthetic) {
    data::PacInjectedOptions o;
    o.n_utterances = config.n_test;
    o.n_layers = config.n_layers + 1;
    o.neurons = config.neurons_per_layer;
    o.dt_ms = config.dt_ms;
    o.duration_s = config.utterance_s;
    o.depths = config.pac_depths;
    o.amp_layer = config.n_layers;
    o.gamma_hz = std::min(45.0, 0.4 * 500.0 / config.dt_ms);
    result.spikes = data::pac_injected(derive_seed(config.seed, {kSeedSynthetic}), o);
    result.spikes.config_hash = hash;
    if (config.top_k) {
      // All synthetic utterances share one duration, so this keeps the first K.
      std::vector<double> d(result.spikes.utterance_ids.size(), config.utterance_s);
      const auto keep = data::top_k_by_duration(d, config.top_k);
      io::SpikeExport kept = result.spikes;
      kept.utterance_ids.clear();
      kept.rasters.clear();
      for (auto i : keep) {
        kept.utterance_ids.push_back(result.spikes.utterance_ids[i]);
        kept.rasters.push_back(result.spikes.rasters[i]);
      }
      result.spikes = std::move(kept);
    }
  } else {
    const auto ds = task_dataset(config);
    train::Model model;
    if (untrained) {
      model = initial_model(config, ds.n_outputs);
    } else {
      const fs::path path = checkpoint.value_or(config.output_dir / "checkpoint.bin");
      require_file(path);
      model = io::load_checkpoint(path, hash).model;
    }
    std::vector<data::Utterance> inputs;
    if (config.simulate_input == "test") {
      inputs = ds.test;
    } else {
      for (std::size_t i = 0; i < config.n_test; ++i) {
        data::Utterance u;
        char id[48];
        std::snprintf(id, sizeof id, "%s-%04zu", config.simulate_input.c_str(), i);
        u.id = id;
        const double dur = ds.test.empty() ? 1.0 : ds.test[i % ds.test.size()].duration_s();
        if (config.simulate_input == "silence") {
          u.wav.samples.assign(static_cast<std::size_t>(dur * u.wav.sample_rate), 0.0);
        } else {
          const auto kind = data::noise_kind_from_string(config.simulate_input.substr(6));
          u.wav = data::noise_input(kind, dur, derive_seed(config.seed, {kSeedNoise, i}));
        }
        inputs.push_back(std::move(u));
      }
    }
    std::vector<double> durations;
    for (const auto& u : inputs) durations.push_back(u.duration_s());
    std::vector<train::Example> examples;
    for (auto i : data::top_k_by_duration(durations, config.top_k)) {
      examples.push_back(data::to_example(inputs[i], config.dt_ms, model.config.n_mels));
    }
    result.spikes = simulate_examples(model, examples, hash, config.threads);
  }

  result.spikes_path = config.output_dir / "spikes.bin";
  result.rates_path = config.output_dir / "rates.json";
  io::save_spikes(result.spikes_path, result.spikes);

  const auto hist = rate_histogram(result.spikes);
  ordered_json j;
  j["config_hash"] = hex(hash);
  j["dt_ms"] = result.spikes.dt_ms;
  j["bin_width_hz"] = hist.bin_width_hz;
  j["n_utterances"] = result.spikes.utterance_ids.size();
  j["layers"] = ordered_json::array();
  for (std::size_t l = 0; l < hist.counts.size(); ++l) {
    j["layers"].push_back({{"layer", l},
                           {"neurons", result.spikes.layer_sizes[l]},
                           {"mean_rate_hz", hist.mean_rate_hz[l]},
                           {"counts", hist.counts[l]}});
  }
  write_text(result.rates_path, j.dump(2) + "\n");
  return result;
}

AnalyzeResult run_analyze(const ExperimentConfig& config, const fs::path& spikes_path,
                          std::size_t n_surrogates) {
  require_file(spikes_path);
  const std::uint64_t hash = config.hash();
  const auto spikes = io::load_spikes(spikes_path, hash);

  osc::ScanOptions opts;
  opts.low_bands = config.analysis_low_bands;
  opts.high_bands = config.analysis_high_bands;
  opts.surrogates.n_surrogates = n_surrogates;
  opts.surrogates.n_bins = config.n_bins;
  opts.seed = derive_seed(config.seed, {kSeedScan});
  opts.threads = config.threads;

  AnalyzeResult result;
  for (std::size_t u = 0; u < spikes.utterance_ids.size(); ++u) {
    auto scan = osc::pac_scan(spikes.rasters[u], spikes.dt_ms, spikes.utterance_ids[u], opts);
    std::move(scan.records.begin(), scan.records.end(), std::back_inserter(result.records));
    std::move(scan.skips.begin(), scan.skips.end(), std::back_inserter(result.skips));
  }
  result.summary = osc::summarize(result.records, result.skips);
  result.csv_path = config.output_dir / "couplings.csv";
  result.summary_path = config.output_dir / "analysis.json";
  osc::write_coupling_csv(result.csv_path, result.records);

  ordered_json j;
  j["config_hash"] = hex(hash);
  j["n_utterances"] = spikes.utterance_ids.size();
  j["n_surrogates"] = n_surrogates;
  j["rows"] = result.summary.rows;
  j["skipped_rows"] = result.summary.skipped_rows;
  j["empty_report"] = result.records.empty();
  j["intra_total"] = result.summary.intra_total;
  j["inter_total"] = result.summary.inter_total;
  j["per_band_counts"] = ordered_json::object();
  for (const auto& [k, v] : result.summary.per_band_counts) j["per_band_counts"][k] = v;
  j["skips"] = ordered_json::array();
  for (const auto& s : result.skips) {
    j["skips"].push_back({{"utterance_id", s.utterance_id},
                          {"scope", s.scope},
                          {"reason", s.reason},
                          {"scenarios", s.scenarios}});
  }
  write_text(result.summary_path, j.dump(2) + "\n");
  return result;
}

ReportResult run_report(const ExperimentConfig& config, const fs::path& spikes_path,
                        const fs::path& couplings_path) {
  require_file(spikes_path);
  require_file(couplings_path);
  const auto spikes = io::load_spikes(spikes_path, config.hash());
  const auto records = osc::read_coupling_csv(couplings_path);
  if (spikes.utterance_ids.empty()) throw Error(Errc::io, spikes_path.string() + " holds no utterances");
  const std::size_t utt = std::min(config.report_utterance, spikes.utterance_ids.size() - 1);
  const std::size_t layer = std::min(config.report_layer, spikes.layer_sizes.size() - 1);
  const fs::path dir = config.output_dir / "report";
  fs::create_directories(dir);
  ReportResult result;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };

  {
    std::string csv = "t,neuron,layer\n";
    for (std::size_t l = 0; l < spikes.layer_sizes.size(); ++l) {
      const auto& r = spikes.rasters[utt][l];
      for (std::size_t t = 0; t < r.rows(); ++t) {
        for (std::size_t n = 0; n < r.cols(); ++n) {
          if (r(t, n)) csv += std::to_string(t) + "," + std::to_string(n) + "," + std::to_string(l) + "\n";
        }
      }
    }
    result.files.push_back(dir / "raster.csv");
    write_text(result.files.back(), csv);
  }
  {
    const auto hist = rate_histogram(spikes);
    std::string csv = "layer,bin_lo_hz,bin_hi_hz,count\n";
    for (std::size_t l = 0; l < hist.counts.size(); ++l) {
      for (std::size_t b = 0; b < hist.counts[l].size(); ++b) {
        csv += std::to_string(l) + "," + num(b * hist.bin_width_hz) + "," +
               num((b + 1) * hist.bin_width_hz) + "," + std::to_string(hist.counts[l][b]) + "\n";
      }
    }
    result.files.push_back(dir / "rate_histogram.csv");
    write_text(result.files.back(), csv);
  }

  ordered_json meta;
  meta["utterance_id"] = spikes.utterance_ids[utt];
  meta["overlay_layer"] = layer;
  meta["overlay_bands"] = ordered_json::array();
  meta["omitted_bands"] = ordered_json::array();
  {
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    std::vector<double> signal;
    double fs_hz = 1000.0 / spikes.dt_ms;
    try {
      const auto pop = osc::population_signal(spikes.rasters[utt][layer], spikes.dt_ms, layer);
      signal = pop.normalized;
      for (const auto& band : osc::canonical_bands()) {
        try {
          columns.emplace_back(band.name, osc::filter_zero_phase(signal, osc::design_bandpass(band, fs_hz)));
          meta["overlay_bands"].push_back(band.name);
        } catch (const Error& e) {
          meta["omitted_bands"].push_back({{"band", band.name}, {"reason", e.what()}});
        }
      }
    } catch (const Error& e) {
      meta["overlay_error"] = e.what();
    }
    std::string csv = "t_s,signal";
    for (const auto& c : columns) csv += "," + c.first;
    csv += "\n";
    for (std::size_t t = 0; t < signal.size(); ++t) {
      csv += num(static_cast<double>(t) / fs_hz) + "," + num(signal[t]);
      for (const auto& c : columns) csv += "," + num(c.second[t]);
      csv += "\n";
    }
    result.files.push_back(dir / "band_overlay.csv");
    write_text(result.files.back(), csv);
  }
  {
    // Strongest coupling by the larger of its two p-values.
    const osc::CouplingRecord* best = nullptr;
    for (const auto& r : records) {
      if (!best || std::max(r.p_mi, r.p_mvl) < std::max(best->p_mi, best->p_mvl)) best = &r;
    }
    std::string csv = "index,mi,mvl\n";
    if (best) {
      const auto it = std::find(spikes.utterance_ids.begin(), spikes.utterance_ids.end(), best->utterance_id);
      if (it == spikes.utterance_ids.end()) {
        throw Error(Errc::format, "coupling table refers to unknown utterance " + best->utterance_id);
      }
      const auto u = static_cast<std::size_t>(it - spikes.utterance_ids.begin());
      const auto P = osc::population_signal(spikes.rasters[u][best->phase_layer], spikes.dt_ms, best->phase_layer);
      const auto A = osc::population_signal(spikes.rasters[u][best->amp_layer], spikes.dt_ms, best->amp_layer);
      osc::SurrogateOptions so;
      so.n_surrogates = config.n_surrogates;
      so.n_bins = config.n_bins;
      so.keep_distributions = true;
      const auto test = osc::coupling_test(
          P, A, osc::band_by_name(best->low_band), osc::band_by_name(best->high_band),
          osc::scenario_seed(derive_seed(config.seed, {kSeedScan}), best->utterance_id, best->phase_layer,
                             best->amp_layer, best->low_band, best->high_band),
          so);
      for (std::size_t i = 0; i < test.mi_surrogates.size(); ++i) {
        csv += std::to_string(i) + "," + num(test.mi_surrogates[i]) + "," + num(test.mvl_surrogates[i]) + "\n";
      }
      meta["surrogate_scenario"] = {{"utterance_id", best->utterance_id},
                                    {"phase_layer", best->phase_layer},
                                    {"amp_layer", best->amp_layer},
                                    {"low_band", best->low_band},
                                    {"high_band", best->high_band},
                                    {"mi", test.mi},
                                    {"mvl", test.mvl},
                                    {"mi_fit", {{"mean", test.mi_mean}, {"std", test.mi_std}}},
                                    {"mvl_fit", {{"mean", test.mvl_mean}, {"std", test.mvl_std}}},
                                    {"p_mi", test.p_mi},
                                    {"p_mvl", test.p_mvl}};
    }
    result.files.push_back(dir / "surrogate_histogram.csv");
    write_text(result.files.back(), csv);
  }
  result.files.push_back(dir / "report.json");
  write_text(result.files.back(), meta.dump(2) + "\n");
  return result;
}

}  // namespace spikeosc::exp
