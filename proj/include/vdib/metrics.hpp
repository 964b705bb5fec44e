// SPDX-License-Identifier: Apache-2.0
//
// One CSV row per measurement, same schema for every experiment:
//
//   experiment,point,epoch,epsilon,ebn0_db,beta,k,error_rate,spike_rate,seconds
//
// `point` indexes the sweep grid (0 for plain training). `ebn0_db` is empty
// when the channel was given as a crossover probability. Reals are printed in
// shortest round-trip form, so parse(format(row)) == row exactly.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vdib {

inline constexpr std::string_view kMetricsHeader =
    "experiment,point,epoch,epsilon,ebn0_db,beta,k,error_rate,spike_rate,seconds";

struct MetricsRow {
  std::string experiment;
  std::size_t point = 0;
  std::size_t epoch = 0;
  double epsilon = 0.0;
  std::optional<double> ebn0_db;
  double beta = 0.0;
  std::size_t k = 0;
  double error_rate = 0.0;
  double spike_rate = 0.0;
  double seconds = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

std::string format_real(double value);
std::string format_row(const MetricsRow& row);

/// Throws ParseError (with line number) on a bad header or row.
std::vector<MetricsRow> parse_metrics(std::istream& in);
std::vector<MetricsRow> load_metrics(const std::filesystem::path& path);

enum class ExportFormat { Csv, Json };

/// Throws ConfigError for anything but "csv" or "json".
ExportFormat parse_export_format(std::string_view name);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// JSON array of objects keyed by the CSV column names, in column order.
void write_metrics_json(std::ostream& out, const std::vector<MetricsRow>& rows);

/// Appends rows to a file as they are produced, flushing each one, so a run
/// that aborts still leaves every finished measurement on disk.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace vdib
