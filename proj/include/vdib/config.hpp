// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat `key = value` text with `#` comments. Command-line
// flags are applied afterwards through the same setter, so a flag always
// wins over the file. See README for the key list.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vdib/events.hpp"
#include "vdib/trainer.hpp"

namespace vdib {

struct DataSource {
  SyntheticConfig synthetic;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 50;
  /// Defaults to the run seed.
  std::optional<std::uint64_t> data_seed;
  /// Event files replace the synthetic generator; both or neither.
  std::filesystem::path train_events;
  std::filesystem::path test_events;

  bool from_files() const { return !train_events.empty(); }
};

struct RunConfig {
  TrainConfig train;
  ModelSpec model;  // n_in is derived from the data geometry
  DataSource data;
  std::filesystem::path out_dir = "vdib-out";

  std::vector<double> ebn0_grid_db = {-8.0, -6.0, -4.0, -2.0, 0.0, 2.0};
  std::vector<double> beta_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::optional<double> train_ebn0_db;  // mismatch training point; defaults to the channel setting
  std::vector<double> test_grid_db = {-3.0, -2.0, -1.0};
  bool train_per_point = false;
  std::filesystem::path checkpoint;  // evaluate this instead of training, if set
  /// Wall-clock column; off by default so reruns are byte-identical.
  bool timing = false;

  std::uint64_t data_seed() const { return data.data_seed.value_or(train.seed); }

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Sets one key. Throws ConfigError on unknown keys or unparsable values.
/// Setting epsilon clears ebn0_db and vice versa.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Reads a config file onto `base`. Rejects duplicate keys and a file that
/// sets both epsilon and ebn0_db; errors carry the line number.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Comma-separated reals; "-inf" is accepted (an Eb/N0 of zero).
std::vector<double> parse_real_list(std::string_view text);

/// Every key accepted by apply_setting, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace vdib
