// SPDX-License-Identifier: Apache-2.0

#include "vdib/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "vdib/errors.hpp"

namespace vdib {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double read_real(std::string_view text, std::size_t line, const char* column) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError(line, std::string("bad value for ") + column + ": '" + std::string(text) + "'");
  }
  return v;
}

std::size_t read_count(std::string_view text, std::size_t line, const char* column) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError(line, std::string("bad value for ") + column + ": '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string format_row(const MetricsRow& r) {
  if (r.experiment.find_first_of(",\n\"") != std::string::npos) {
    throw std::invalid_argument("experiment id may not contain commas, quotes or newlines");
  }
  std::string s = r.experiment;
  s += ',' + std::to_string(r.point);
  s += ',' + std::to_string(r.epoch);
  s += ',' + format_real(r.epsilon);
  s += ',' + (r.ebn0_db ? format_real(*r.ebn0_db) : std::string());
  s += ',' + format_real(r.beta);
  s += ',' + std::to_string(r.k);
  s += ',' + format_real(r.error_rate);
  s += ',' + format_real(r.spike_rate);
  s += ',' + format_real(r.seconds);
  return s;
}

std::vector<MetricsRow> parse_metrics(std::istream& in) {
  std::string text;
  if (!std::getline(in, text)) throw ParseError(1, "empty metrics file (missing header)");
  if (!text.empty() && text.back() == '\r') text.pop_back();
  if (text != kMetricsHeader) throw ParseError(1, "unexpected metrics header '" + text + "'");
  std::vector<MetricsRow> rows;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 10) {
      throw ParseError(line, "expected 10 columns, found " + std::to_string(f.size()));
    }
    MetricsRow r;
    r.experiment = std::string(f[0]);
    r.point = read_count(f[1], line, "point");
    r.epoch = read_count(f[2], line, "epoch");
    r.epsilon = read_real(f[3], line, "epsilon");
    if (!f[4].empty()) r.ebn0_db = read_real(f[4], line, "ebn0_db");
    r.beta = read_real(f[5], line, "beta");
    r.k = read_count(f[6], line, "k");
    r.error_rate = read_real(f[7], line, "error_rate");
    r.spike_rate = read_real(f[8], line, "spike_rate");
    r.seconds = read_real(f[9], line, "seconds");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MetricsRow> load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file " + path.string());
  return parse_metrics(in);
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw ConfigError("unknown export format '" + std::string(name) + "' (csv|json)");
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

void write_metrics_json(std::ostream& out, const std::vector<MetricsRow>& rows) {
  // ordered_json keeps the CSV column order; infinities become strings
  // because JSON has no literal for them.
  auto real = [](double v) -> nlohmann::ordered_json {
    if (std::isinf(v)) return format_real(v);
    return v;
  };
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["experiment"] = r.experiment;
    o["point"] = r.point;
    o["epoch"] = r.epoch;
    o["epsilon"] = real(r.epsilon);
    o["ebn0_db"] = r.ebn0_db ? real(*r.ebn0_db) : nlohmann::ordered_json(nullptr);
    o["beta"] = real(r.beta);
    o["k"] = r.k;
    o["error_rate"] = real(r.error_rate);
    o["spike_rate"] = real(r.spike_rate);
    o["seconds"] = real(r.seconds);
    doc.push_back(std::move(o));
  }
  out << doc.dump(2) << '\n';
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("cannot write metrics file " + path.string());
  out_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << format_row(row) << '\n' << std::flush;
  if (!out_) throw std::runtime_error("write failed for metrics file " + path_.string());
}

}  // namespace vdib
