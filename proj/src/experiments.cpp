// SPDX-License-Identifier: Apache-2.0

#include "vdib/experiments.hpp"

#include <chrono>
#include <cmath>

#include "vdib/errors.hpp"

namespace vdib {

namespace {

constexpr std::uint64_t kTrainSetTag = 1;
constexpr std::uint64_t kTestSetTag = 2;

ChannelConfig channel_at(const RunConfig& config, double ebn0_db) {
  return ChannelConfig::from_ebn0_db(ebn0_db, config.train.channel.mapping);
}

void require_trainable(const ChannelConfig& channel, const char* what) {
  if (!(channel.crossover() < 0.5)) {
    throw ConfigError(std::string(what) + ": training at epsilon = 0.5 is singular (the channel carries no "
                      "information); evaluate a trained model there instead");
  }
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return enabled_ ? s : 0.0;
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

ModelSpec spec_for(const RunConfig& config, const ExperimentData& data) {
  ModelSpec spec = config.model;
  spec.n_in = data.n_in;
  return spec;
}

/// Trains with `train` as the trainer config; every epoch becomes a row.
Model train_model(const RunConfig& config, const TrainConfig& train, const ExperimentData& data,
                  std::string_view experiment, std::size_t point, const std::function<void(MetricsRow)>& emit) {
  Model model = init_model(spec_for(config, data), train.seed);
  Trainer trainer(model, train);
  Stopwatch clock(config.timing);
  for (std::size_t e = 0; e < train.epochs; ++e) {
    const EpochMetrics m = trainer.train_epoch(data.train, data.test);
    MetricsRow row;
    row.experiment = std::string(experiment);
    row.point = point;
    row.epoch = m.epoch;
    row.epsilon = trainer.epsilon();
    row.ebn0_db = train.channel.ebn0_db;
    row.beta = train.beta;
    row.k = model.encoder.k;
    row.error_rate = m.error_rate;
    row.spike_rate = m.spike_rate;
    row.seconds = clock.lap();
    emit(std::move(row));
  }
  return model;
}

MetricsRow evaluate_row(const RunConfig& config, const Model& model, const ExperimentData& data,
                        std::string_view experiment, std::size_t point, std::size_t epoch, double ebn0_db,
                        double beta) {
  Stopwatch clock(config.timing);
  const double eps = channel_at(config, ebn0_db).crossover();
  const EvalResult r =
      evaluate(model, data.test, eps, config.train.seed, kEvalStreamTag, config.train.eval_feedback);
  MetricsRow row;
  row.experiment = std::string(experiment);
  row.point = point;
  row.epoch = epoch;
  row.epsilon = eps;
  row.ebn0_db = ebn0_db;
  row.beta = beta;
  row.k = model.encoder.k;
  row.error_rate = r.error_rate;
  row.spike_rate = r.spike_rate;
  row.seconds = clock.lap();
  return row;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Train: return "train";
    case Command::SweepSnr: return "sweep-snr";
    case Command::Mismatch: return "mismatch";
    case Command::SweepBeta: return "sweep-beta";
  }
  return "train";
}

void validate_for(const RunConfig& config, Command command) {
  config.validate();
  switch (command) {
    case Command::Train:
      require_trainable(config.train.channel, "train");
      break;
    case Command::SweepSnr:
      if (config.ebn0_grid_db.empty()) throw ConfigError("sweep-snr: ebn0_grid_db is empty");
      for (double db : config.ebn0_grid_db) channel_at(config, db).crossover();
      if (config.train_per_point) {
        if (!config.checkpoint.empty()) throw ConfigError("sweep-snr: train_per_point and checkpoint conflict");
        for (double db : config.ebn0_grid_db) require_trainable(channel_at(config, db), "sweep-snr");
      } else if (config.checkpoint.empty()) {
        require_trainable(config.train.channel, "sweep-snr");
      }
      break;
    case Command::Mismatch:
      if (config.test_grid_db.empty()) throw ConfigError("mismatch: test_grid_db is empty");
      for (double db : config.test_grid_db) channel_at(config, db).crossover();
      require_trainable(config.train_ebn0_db ? channel_at(config, *config.train_ebn0_db) : config.train.channel,
                        "mismatch");
      break;
    case Command::SweepBeta:
      if (config.beta_grid.empty()) throw ConfigError("sweep-beta: beta_grid is empty");
      require_trainable(config.train.channel, "sweep-beta");
      break;
  }
}

ExperimentData load_data(const RunConfig& config) {
  std::vector<EventRecord> train_records, test_records;
  if (config.data.from_files()) {
    train_records = load_events(config.data.train_events);
    test_records = load_events(config.data.test_events);
    if (train_records.empty() || test_records.empty()) throw ValidationError("event files hold no records");
    const auto& first = train_records.front();
    for (const auto* set : {&train_records, &test_records}) {
      for (const auto& r : *set) {
        if (r.width != first.width || r.height != first.height) {
          throw ValidationError("event records disagree on geometry");
        }
      }
    }
  } else {
    const auto seed = config.data_seed();
    train_records = generate_synthetic_set(config.data.synthetic, config.data.train_per_class, seed, kTrainSetTag);
    test_records = generate_synthetic_set(config.data.synthetic, config.data.test_per_class, seed, kTestSetTag);
  }
  ExperimentData data;
  data.train = make_dataset(train_records, config.model.steps, config.model.classes);
  data.test = make_dataset(test_records, config.model.steps, config.model.classes);
  const auto& r = train_records.front();
  data.n_in = 2 * static_cast<std::size_t>(r.width) * r.height;
  return data;
}

TrainOutcome run_train(const RunConfig& config, const ExperimentData& data, const RowSink& sink) {
  TrainOutcome out;
  out.model = train_model(config, config.train, data, to_string(Command::Train), 0, [&](MetricsRow row) {
    sink(row);
    out.rows.push_back(std::move(row));
  });
  return out;
}

std::vector<MetricsRow> run_sweep_snr(const RunConfig& config, const ExperimentData& data, const Model* model,
                                      std::size_t model_epochs, const RowSink& sink) {
  const auto id = to_string(Command::SweepSnr);
  std::vector<MetricsRow> rows;
  for (std::size_t p = 0; p < config.ebn0_grid_db.size(); ++p) {
    const double db = config.ebn0_grid_db[p];
    MetricsRow row;
    if (config.train_per_point) {
      TrainConfig train = config.train;
      train.channel = channel_at(config, db);
      const Model trained = train_model(config, train, data, id, p, [&row](MetricsRow r) { row = std::move(r); });
      if (train.epochs == 0) {
        row = evaluate_row(config, trained, data, id, p, 0, db, train.beta);
      }
    } else {
      if (model == nullptr) throw std::invalid_argument("sweep-snr: no model to evaluate");
      row = evaluate_row(config, *model, data, id, p, model_epochs, db, config.train.beta);
    }
    sink(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> run_mismatch(const RunConfig& config, const ExperimentData& data, const RowSink& sink,
                                     Model* trained) {
  const auto id = to_string(Command::Mismatch);
  TrainConfig train = config.train;
  if (config.train_ebn0_db) train.channel = channel_at(config, *config.train_ebn0_db);
  Model model = train_model(config, train, data, id, 0, [](MetricsRow) {});
  std::vector<MetricsRow> rows;
  for (std::size_t p = 0; p < config.test_grid_db.size(); ++p) {
    MetricsRow row = evaluate_row(config, model, data, id, p, train.epochs, config.test_grid_db[p], train.beta);
    sink(row);
    rows.push_back(std::move(row));
  }
  if (trained != nullptr) *trained = std::move(model);
  return rows;
}

std::vector<MetricsRow> run_sweep_beta(const RunConfig& config, const ExperimentData& data, const RowSink& sink) {
  std::vector<MetricsRow> rows;
  for (std::size_t p = 0; p < config.beta_grid.size(); ++p) {
    TrainConfig train = config.train;
    train.beta = config.beta_grid[p];
    train_model(config, train, data, to_string(Command::SweepBeta), p, [&](MetricsRow row) {
      sink(row);
      rows.push_back(std::move(row));
    });
  }
  return rows;
}

}  // namespace vdib
