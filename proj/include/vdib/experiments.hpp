// SPDX-License-Identifier: Apache-2.0
//
// Drivers behind the CLI verbs. Each driver emits MetricsRow values through a
// sink as soon as they are measured and also returns them.

#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "vdib/config.hpp"
#include "vdib/metrics.hpp"
#include "vdib/trainer.hpp"

namespace vdib {

enum class Command { Train, SweepSnr, Mismatch, SweepBeta };

std::string_view to_string(Command command);

/// Full validation for a command, before any data or model is allocated.
void validate_for(const RunConfig& config, Command command);

struct ExperimentData {
  Dataset train;
  Dataset test;
  std::size_t n_in = 0;
};

/// Synthetic sets are generated from (data_seed, tag 1 / tag 2); event files
/// must share one geometry and carry labels below `classes`.
ExperimentData load_data(const RunConfig& config);

using RowSink = std::function<void(const MetricsRow&)>;

struct TrainOutcome {
  Model model;
  std::vector<MetricsRow> rows;  // one per epoch
};

/// Fresh model from (config, seed), trained for config.train.epochs.
TrainOutcome run_train(const RunConfig& config, const ExperimentData& data, const RowSink& sink);

/// One row per grid point. With train_per_point each point trains a fresh
/// model from the same seed; otherwise `model` is evaluated at every point.
std::vector<MetricsRow> run_sweep_snr(const RunConfig& config, const ExperimentData& data, const Model* model,
                                      std::size_t model_epochs, const RowSink& sink);

/// Trains once at train_ebn0_db (or the configured channel) and evaluates on
/// test_grid_db without retraining. The trained model is returned via `trained`.
std::vector<MetricsRow> run_mismatch(const RunConfig& config, const ExperimentData& data, const RowSink& sink,
                                     Model* trained = nullptr);

/// A fresh model per beta; one row per (beta, epoch).
std::vector<MetricsRow> run_sweep_beta(const RunConfig& config, const ExperimentData& data, const RowSink& sink);

}  // namespace vdib
