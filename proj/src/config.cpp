// SPDX-License-Identifier: Apache-2.0

#include "vdib/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>

#include "vdib/errors.hpp"

namespace vdib {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string quoted(std::string_view key, std::string_view value) {
  return std::string(key) + " = '" + std::string(value) + "'";
}

double to_real(std::string_view key, std::string_view value) {
  const std::string text(trim(value));
  if (text == "inf" || text == "+inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError("expected a real number: " + quoted(key, value));
  }
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  const std::string_view text = trim(value);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError("expected a non-negative integer: " + quoted(key, value));
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string_view text = trim(value);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("expected true/false: " + quoted(key, value));
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

template <class T>
Setter size_field(T RunConfig::*outer, std::size_t T::*field) {
  return [outer, field](RunConfig& c, std::string_view k, std::string_view v) {
    (c.*outer).*field = static_cast<std::size_t>(to_uint(k, v));
  };
}

template <class T>
Setter real_field(T RunConfig::*outer, double T::*field) {
  return [outer, field](RunConfig& c, std::string_view k, std::string_view v) { (c.*outer).*field = to_real(k, v); };
}

// Ordered so config_keys() doubles as documentation order.
const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", [](RunConfig& c, auto k, auto v) { c.train.seed = to_uint(k, v); }},
      {"epochs", size_field(&RunConfig::train, &TrainConfig::epochs)},
      {"batch_size", size_field(&RunConfig::train, &TrainConfig::batch_size)},
      {"threads", size_field(&RunConfig::train, &TrainConfig::threads)},
      {"beta", real_field(&RunConfig::train, &TrainConfig::beta)},
      {"eta", real_field(&RunConfig::train, &TrainConfig::eta)},
      {"encoder_eta_scale", real_field(&RunConfig::train, &TrainConfig::encoder_eta_scale)},
      {"prior_rate", real_field(&RunConfig::train, &TrainConfig::prior_rate)},
      {"optimizer", [](RunConfig& c, auto, auto v) { c.train.optimizer = parse_optimizer(trim(v)); }},
      {"momentum", real_field(&RunConfig::train, &TrainConfig::momentum)},
      {"adam_beta1", real_field(&RunConfig::train, &TrainConfig::adam_beta1)},
      {"adam_beta2", real_field(&RunConfig::train, &TrainConfig::adam_beta2)},
      {"adam_eps", real_field(&RunConfig::train, &TrainConfig::adam_eps)},
      {"clip_norm", real_field(&RunConfig::train, &TrainConfig::clip_norm)},
      {"baseline", [](RunConfig& c, auto k, auto v) { c.train.baseline = to_bool(k, v); }},
      {"baseline_decay", real_field(&RunConfig::train, &TrainConfig::baseline_decay)},
      {"eval_feedback", [](RunConfig& c, auto, auto v) { c.train.eval_feedback = parse_eval_feedback(trim(v)); }},
      {"epsilon",
       [](RunConfig& c, auto k, auto v) {
         c.train.channel.epsilon = to_real(k, v);
         c.train.channel.ebn0_db.reset();
       }},
      {"ebn0_db",
       [](RunConfig& c, auto k, auto v) {
         c.train.channel.ebn0_db = to_real(k, v);
         c.train.channel.epsilon.reset();
       }},
      {"ebn0_mapping",
       [](RunConfig& c, auto k, auto v) {
         const auto name = trim(v);
         if (name == "q2x") {
           c.train.channel.mapping = &ebn0_to_epsilon;
         } else if (name == "bpsk") {
           c.train.channel.mapping = &ebn0_to_epsilon_bpsk;
         } else {
           throw ConfigError("expected q2x or bpsk: " + quoted(k, v));
         }
       }},
      {"k", size_field(&RunConfig::model, &ModelSpec::k)},
      {"T",
       [](RunConfig& c, auto k, auto v) {
         c.model.steps = static_cast<std::size_t>(to_uint(k, v));
         c.train.steps = c.model.steps;
       }},
      {"hidden", size_field(&RunConfig::model, &ModelSpec::hidden)},
      {"classes",
       [](RunConfig& c, auto k, auto v) {
         c.model.classes = static_cast<std::size_t>(to_uint(k, v));
         c.data.synthetic.classes = static_cast<std::uint32_t>(c.model.classes);
       }},
      {"output", [](RunConfig& c, auto, auto v) { c.model.output = parse_output_activation(trim(v)); }},
      {"tau_a", real_field(&RunConfig::model, &ModelSpec::tau_a)},
      {"window_a", size_field(&RunConfig::model, &ModelSpec::window_a)},
      {"tau_b", real_field(&RunConfig::model, &ModelSpec::tau_b)},
      {"window_b", size_field(&RunConfig::model, &ModelSpec::window_b)},
      {"init_ff_scale", [](RunConfig& c, auto k, auto v) { c.model.encoder_init.ff_range_scale = to_real(k, v); }},
      {"init_feedback", [](RunConfig& c, auto k, auto v) { c.model.encoder_init.feedback_weight = to_real(k, v); }},
      {"init_rate", [](RunConfig& c, auto k, auto v) { c.model.encoder_init.initial_rate = to_real(k, v); }},
      {"width", [](RunConfig& c, auto k, auto v) { c.data.synthetic.width = static_cast<std::uint32_t>(to_uint(k, v)); }},
      {"height",
       [](RunConfig& c, auto k, auto v) { c.data.synthetic.height = static_cast<std::uint32_t>(to_uint(k, v)); }},
      {"duration_us", [](RunConfig& c, auto k, auto v) { c.data.synthetic.duration_us = to_uint(k, v); }},
      {"bar_rate_hz", [](RunConfig& c, auto k, auto v) { c.data.synthetic.bar_rate_hz = to_real(k, v); }},
      {"background_rate_hz",
       [](RunConfig& c, auto k, auto v) { c.data.synthetic.background_rate_hz = to_real(k, v); }},
      {"bar_sigma", [](RunConfig& c, auto k, auto v) { c.data.synthetic.bar_sigma = to_real(k, v); }},
      {"train_per_class", size_field(&RunConfig::data, &DataSource::train_per_class)},
      {"test_per_class", size_field(&RunConfig::data, &DataSource::test_per_class)},
      {"data_seed", [](RunConfig& c, auto k, auto v) { c.data.data_seed = to_uint(k, v); }},
      {"train_events", [](RunConfig& c, auto, auto v) { c.data.train_events = std::string(trim(v)); }},
      {"test_events", [](RunConfig& c, auto, auto v) { c.data.test_events = std::string(trim(v)); }},
      {"out", [](RunConfig& c, auto, auto v) { c.out_dir = std::string(trim(v)); }},
      {"ebn0_grid_db", [](RunConfig& c, auto, auto v) { c.ebn0_grid_db = parse_real_list(v); }},
      {"beta_grid", [](RunConfig& c, auto, auto v) { c.beta_grid = parse_real_list(v); }},
      {"train_ebn0_db", [](RunConfig& c, auto k, auto v) { c.train_ebn0_db = to_real(k, v); }},
      {"test_grid_db", [](RunConfig& c, auto, auto v) { c.test_grid_db = parse_real_list(v); }},
      {"train_per_point", [](RunConfig& c, auto k, auto v) { c.train_per_point = to_bool(k, v); }},
      {"checkpoint", [](RunConfig& c, auto, auto v) { c.checkpoint = std::string(trim(v)); }},
      {"timing", [](RunConfig& c, auto k, auto v) { c.timing = to_bool(k, v); }},
  };
  return table;
}

void check_grid(const std::vector<double>& grid, const char* name) {
  for (double g : grid) {
    if (std::isnan(g) || g == INFINITY) throw ConfigError(std::string(name) + ": entries must be finite or -inf");
  }
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(to_real("list entry", item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view(text);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key(trim(view.substr(0, eq)));
    const std::string_view value = trim(view.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (seen.count("epsilon") && seen.count("ebn0_db")) {
    throw ConfigError("epsilon and ebn0_db are mutually exclusive");
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::validate() const {
  train.validate();
  if (train.steps != model.steps) throw ConfigError("T differs between trainer and model");
  if (model.k < 1) throw ConfigError("k must be >= 1");
  if (model.steps < 1) throw ConfigError("T must be >= 1");
  if (model.hidden < 1) throw ConfigError("hidden must be >= 1");
  if (model.classes < 2) throw ConfigError("classes must be >= 2");
  if (!(model.tau_a > 0.0) || !(model.tau_b > 0.0)) throw ConfigError("kernel time constants must be positive");
  if (model.window_a < 1 || model.window_b < 1) throw ConfigError("kernel windows must be >= 1");
  const double rate = model.encoder_init.initial_rate;
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("init_rate must lie in (0, 1)");
  if (!std::isfinite(model.encoder_init.ff_range_scale) || !std::isfinite(model.encoder_init.feedback_weight)) {
    throw ConfigError("encoder init values must be finite");
  }
  if (data.from_files() != !data.test_events.empty()) {
    throw ConfigError("train_events and test_events must be given together");
  }
  if (!data.from_files()) {
    data.synthetic.validate();
    if (data.synthetic.classes != model.classes) throw ConfigError("synthetic classes differ from model classes");
    if (data.train_per_class < 1 || data.test_per_class < 1) {
      throw ConfigError("train_per_class and test_per_class must be >= 1");
    }
  }
  if (out_dir.empty()) throw ConfigError("out must name a directory");
  check_grid(ebn0_grid_db, "ebn0_grid_db");
  check_grid(test_grid_db, "test_grid_db");
  for (double b : beta_grid) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("beta_grid: entries must lie in (0, inf)");
  }
  if (train_ebn0_db && (std::isnan(*train_ebn0_db) || *train_ebn0_db == INFINITY)) {
    throw ConfigError("train_ebn0_db must be finite or -inf");
  }
}

}  // namespace vdib
