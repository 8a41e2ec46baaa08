#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selftest.hpp"
#include "spikeosc/config.hpp"
#include "spikeosc/errors.hpp"
#include "spikeosc/experiment.hpp"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.overrides, "override a key: --set key=value (repeatable)");
}

spikeosc::ExperimentConfig load(const Common& c) {
  auto config = c.config_path.empty() ? spikeosc::parse_config("") : spikeosc::load_config(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw spikeosc::Error(spikeosc::Errc::config, "--set expects key=value, got '" + kv + "'");
    }
    spikeosc::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spikeosc: spiking network training and oscillation analysis"};
  app.require_subcommand(1);

  Common train_opts, sim_opts, ana_opts, rep_opts, cfg_opts;

  auto* train = app.add_subcommand("train", "train a model and save the best-validation checkpoint");
  add_common(train, train_opts);

  auto* simulate = app.add_subcommand("simulate", "export spike rasters and firing-rate histograms");
  add_common(simulate, sim_opts);
  std::string checkpoint;
  bool untrained = false;
  simulate->add_option("--checkpoint", checkpoint, "checkpoint (default: <output_dir>/checkpoint.bin)");
  simulate->add_flag("--untrained", untrained, "use a freshly initialised network");

  auto* analyze = app.add_subcommand("analyze", "phase-amplitude coupling scan of a spike export");
  add_common(analyze, ana_opts);
  std::string spikes_in;
  std::optional<std::size_t> surrogates;
  analyze->add_option("--spikes", spikes_in, "spike export (default: <output_dir>/spikes.bin)");
  analyze->add_option("--surrogates", surrogates, "surrogates per scenario (default: n_surrogates)");

  auto* report = app.add_subcommand("report", "plot-ready CSV bundle from analysis outputs");
  add_common(report, rep_opts);
  std::string rep_spikes, rep_couplings;
  report->add_option("--spikes", rep_spikes, "spike export (default: <output_dir>/spikes.bin)");
  report->add_option("--couplings", rep_couplings, "coupling CSV (default: <output_dir>/couplings.csv)");

  auto* show = app.add_subcommand("config", "print the resolved configuration and its hash");
  add_common(show, cfg_opts);

  auto* selftest = app.add_subcommand("selftest", "run the oracle and property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto config = load(train_opts);
      const auto r = spikeosc::exp::run_train(config, &std::cout);
      std::cout << "best epoch " << r.best_epoch << ", val metric " << r.best_val_metric << "\n"
                << "checkpoint " << r.checkpoint.string() << "\n";
    } else if (simulate->parsed()) {
      const auto config = load(sim_opts);
      std::optional<std::filesystem::path> ck;
      if (!checkpoint.empty()) ck = checkpoint;
      const auto r = spikeosc::exp::run_simulate(config, ck, untrained);
      std::cout << r.spikes.utterance_ids.size() << " utterances, " << r.spikes.total_spikes()
                << " spikes -> " << r.spikes_path.string() << "\n";
    } else if (analyze->parsed()) {
      const auto config = load(ana_opts);
      const std::filesystem::path in = spikes_in.empty() ? config.output_dir / "spikes.bin" : std::filesystem::path(spikes_in);
      const auto r = spikeosc::exp::run_analyze(config, in, surrogates.value_or(config.n_surrogates));
      std::cout << r.summary.rows << " coupling rows (" << r.summary.skipped_rows << " skipped), "
                << r.summary.intra_total << " intra / " << r.summary.inter_total
                << " inter significant -> " << r.csv_path.string() << "\n";
      for (const auto& s : r.skips) {
        std::cerr << "skip " << s.utterance_id << " " << s.scope << ": " << s.reason << "\n";
      }
    } else if (report->parsed()) {
      const auto config = load(rep_opts);
      const std::filesystem::path sp = rep_spikes.empty() ? config.output_dir / "spikes.bin" : std::filesystem::path(rep_spikes);
      const std::filesystem::path cp =
          rep_couplings.empty() ? config.output_dir / "couplings.csv" : std::filesystem::path(rep_couplings);
      const auto r = spikeosc::exp::run_report(config, sp, cp);
      for (const auto& f : r.files) std::cout << f.string() << "\n";
    } else if (show->parsed()) {
      const auto config = load(cfg_opts);
      std::cout << config.canonical_text();
      std::printf("# hash %016llx\n", static_cast<unsigned long long>(config.hash()));
    } else if (selftest->parsed()) {
      return spikeosc::oracles::run_selftest(std::cout) == 0 ? 0 : 1;
    }
  } catch (const spikeosc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
