// SPDX-License-Identifier: Apache-2.0
//
// vdib: train and evaluate the spiking encoder / edge decoder pair.
//
//   vdib train       [common flags]
//   vdib sweep-snr   [common flags] [--grid dB,...] [--train-per-point | --checkpoint file]
//   vdib mismatch    [common flags] [--train-ebn0-db dB] [--grid dB,...]
//   vdib sweep-beta  [common flags] [--grid beta,...]
//   vdib export      <metrics.csv> [--format csv|json] [--out file]

#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vdib/checkpoint.hpp"
#include "vdib/config.hpp"
#include "vdib/errors.hpp"
#include "vdib/experiments.hpp"
#include "vdib/metrics.hpp"

namespace {

namespace fs = std::filesystem;
using namespace vdib;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitUsage = 64;

// Flag values kept as text and routed through apply_setting, so flags and
// config files share one parser and one set of error messages.
struct CommonFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key = value)")->check(CLI::ExistingFile);
  auto text = [&](const char* flag, const char* key, const char* help) {
    return cmd->add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
  };
  text("--seed", "seed", "run seed");
  text("--out", "out", "output directory");
  auto* eps = text("--epsilon", "epsilon", "channel crossover probability");
  auto* ebn0 = text("--ebn0-db", "ebn0_db", "channel Eb/N0 in dB");
  eps->excludes(ebn0);
  text("--beta", "beta", "regularization weight");
  text("--k", "k", "encoder read-out neurons");
  text("--T", "T", "time steps per sample");
  text("--epochs", "epochs", "training epochs");
  cmd->add_option("--set", flags.sets, "extra key=value override (repeatable)");
  cmd->add_flag("--timing", flags.timing, "record wall-clock seconds per row");
}

RunConfig build_config(const CommonFlags& flags) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  for (const std::string& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    apply_setting(config, key, kv.substr(eq + 1));
  }
  for (const auto& [key, value] : flags.values) apply_setting(config, key, value);
  if (flags.timing) config.timing = true;
  return config;
}

void check_model_fits(const Model& model, const RunConfig& config, const ExperimentData& data) {
  if (model.encoder.n_in != data.n_in || model.decoder.in_dim != model.encoder.k * config.model.steps ||
      model.decoder.classes != config.model.classes) {
    throw ConfigError("checkpoint geometry does not match the configured data, k, T and classes");
  }
}

int run_experiment(Command command, const CommonFlags& flags, const std::function<void(RunConfig&)>& extra) {
  RunConfig config = build_config(flags);
  extra(config);
  validate_for(config, command);

  fs::create_directories(config.out_dir);
  MetricsWriter writer(config.out_dir / "metrics.csv");
  const RowSink sink = [&writer](const MetricsRow& row) { writer.write(row); };
  const ExperimentData data = load_data(config);
  const fs::path checkpoint = config.out_dir / "checkpoint.txt";

  switch (command) {
    case Command::Train: {
      const TrainOutcome out = run_train(config, data, sink);
      save_checkpoint(checkpoint, out.model);
      break;
    }
    case Command::SweepSnr: {
      if (config.train_per_point) {
        run_sweep_snr(config, data, nullptr, 0, sink);
      } else if (!config.checkpoint.empty()) {
        const Model model = load_checkpoint(config.checkpoint);
        check_model_fits(model, config, data);
        run_sweep_snr(config, data, &model, 0, sink);
      } else {
        const TrainOutcome trained = run_train(config, data, [](const MetricsRow&) {});
        save_checkpoint(checkpoint, trained.model);
        run_sweep_snr(config, data, &trained.model, config.train.epochs, sink);
      }
      break;
    }
    case Command::Mismatch: {
      Model model;
      run_mismatch(config, data, sink, &model);
      save_checkpoint(checkpoint, model);
      break;
    }
    case Command::SweepBeta:
      run_sweep_beta(config, data, sink);
      break;
  }
  return 0;
}

int run_export(const std::string& path, const std::string& format, const std::string& out_path) {
  const ExportFormat fmt = parse_export_format(format);
  const auto rows = load_metrics(path);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  if (fmt == ExportFormat::Csv) {
    write_metrics_csv(out, rows);
  } else {
    write_metrics_json(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vdib: spiking semantic encoder over a binary symmetric channel"};
  app.require_subcommand(1);
  app.failure_message([](const CLI::App*, const CLI::Error& e) { return std::string("vdib: usage: ") + e.what() + "\n"; });

  CommonFlags train_flags, snr_flags, mismatch_flags, beta_flags;
  auto* train = app.add_subcommand("train", "train once, write checkpoint and per-epoch metrics");
  add_common(train, train_flags);

  auto* snr = app.add_subcommand("sweep-snr", "test error across an Eb/N0 grid");
  add_common(snr, snr_flags);
  std::optional<std::string> snr_grid, snr_checkpoint;
  bool per_point = false;
  snr->add_option("--grid", snr_grid, "Eb/N0 grid in dB, comma separated (-inf allowed)");
  auto* per_point_flag = snr->add_flag("--train-per-point", per_point, "train a fresh model at every grid point");
  snr->add_option("--checkpoint", snr_checkpoint, "evaluate this checkpoint instead of training")
      ->excludes(per_point_flag);

  auto* mismatch = app.add_subcommand("mismatch", "train at one Eb/N0, test across a grid");
  add_common(mismatch, mismatch_flags);
  std::optional<std::string> mismatch_train, mismatch_grid;
  mismatch->add_option("--train-ebn0-db", mismatch_train, "training Eb/N0 in dB");
  mismatch->add_option("--grid", mismatch_grid, "test Eb/N0 grid in dB, comma separated");

  auto* beta = app.add_subcommand("sweep-beta", "train per beta, per-epoch error and spike rate");
  add_common(beta, beta_flags);
  std::optional<std::string> beta_grid;
  beta->add_option("--grid", beta_grid, "beta grid, comma separated");

  auto* exp = app.add_subcommand("export", "re-emit a metrics file as csv or json");
  std::string export_path, export_format = "csv", export_out;
  exp->add_option("metrics", export_path, "metrics.csv")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", export_format, "csv (default) or json");
  exp->add_option("--out", export_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;  // --help and --version exit cleanly
  }

  try {
    if (*train) return run_experiment(Command::Train, train_flags, [](RunConfig&) {});
    if (*snr) {
      return run_experiment(Command::SweepSnr, snr_flags, [&](RunConfig& c) {
        if (snr_grid) apply_setting(c, "ebn0_grid_db", *snr_grid);
        if (per_point) c.train_per_point = true;
        if (snr_checkpoint) apply_setting(c, "checkpoint", *snr_checkpoint);
      });
    }
    if (*mismatch) {
      return run_experiment(Command::Mismatch, mismatch_flags, [&](RunConfig& c) {
        if (mismatch_train) apply_setting(c, "train_ebn0_db", *mismatch_train);
        if (mismatch_grid) apply_setting(c, "test_grid_db", *mismatch_grid);
      });
    }
    if (*beta) {
      return run_experiment(Command::SweepBeta, beta_flags, [&](RunConfig& c) {
        if (beta_grid) apply_setting(c, "beta_grid", *beta_grid);
      });
    }
    if (*exp) return run_export(export_path, export_format, export_out);
  } catch (const ConfigError& e) {
    std::cerr << "vdib: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "vdib: training diverged (metrics so far are on disk): " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "vdib: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
