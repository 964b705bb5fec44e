// SPDX-License-Identifier: Apache-2.0

#include "vdib/events.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "vdib/numerics.hpp"

namespace vdib {

void EventRecord::validate() const {
  std::uint64_t previous = 0;
  for (std::size_t n = 0; n < events.size(); ++n) {
    const Event& e = events[n];
    if (e.x >= width || e.y >= height) {
      throw ValidationError("event " + std::to_string(n) + ": pixel (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ") outside " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    if (e.polarity > 1) {
      throw ValidationError("event " + std::to_string(n) + ": polarity must be 0 or 1");
    }
    if (e.timestamp_us > duration_us) {
      throw ValidationError("event " + std::to_string(n) + ": timestamp beyond record duration");
    }
    if (e.timestamp_us < previous) {
      throw ValidationError("event " + std::to_string(n) + ": timestamps not sorted");
    }
    previous = e.timestamp_us;
  }
}

FrameTensor::FrameTensor(std::size_t steps, std::size_t height, std::size_t width)
    : steps_(steps), height_(height), width_(width), data_(steps * 2 * height * width, 0) {}

std::size_t FrameTensor::total() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void SyntheticConfig::validate() const {
  if (classes == 0) throw ConfigError("synthetic: classes must be >= 1");
  if (width == 0 || height == 0) throw ConfigError("synthetic: zero-area geometry");
  if (duration_us == 0) throw ConfigError("synthetic: duration must be positive");
  if (!(bar_rate_hz >= 0.0) || !(background_rate_hz >= 0.0)) {
    throw ConfigError("synthetic: rates must be non-negative");
  }
  if (!(bar_sigma > 0.0)) throw ConfigError("synthetic: bar_sigma must be positive");
}

double template_rate(const SyntheticConfig& config, std::uint32_t label, std::uint32_t x, std::uint32_t y) {
  const double angle = std::numbers::pi * static_cast<double>(label) / static_cast<double>(config.classes);
  const double cx = 0.5 * static_cast<double>(config.width - 1);
  const double cy = 0.5 * static_cast<double>(config.height - 1);
  // Distance from the pixel centre to the line through (cx, cy) along `angle`.
  const double dx = static_cast<double>(x) - cx;
  const double dy = static_cast<double>(y) - cy;
  const double dist = std::abs(-std::sin(angle) * dx + std::cos(angle) * dy);
  const double profile = std::exp(-dist * dist / (2.0 * config.bar_sigma * config.bar_sigma));
  return config.background_rate_hz + config.bar_rate_hz * profile;
}

double template_on_probability(const SyntheticConfig& config, std::uint32_t label) {
  return 0.5 + 0.3 * std::cos(2.0 * std::numbers::pi * static_cast<double>(label) /
                              static_cast<double>(config.classes));
}

EventRecord generate_synthetic(std::uint32_t label, const SyntheticConfig& config, SeededRng& rng) {
  config.validate();
  if (label >= config.classes) {
    throw DomainError("generate_synthetic: class index out of range");
  }
  EventRecord record;
  record.label = label;
  record.width = config.width;
  record.height = config.height;
  record.duration_us = config.duration_us;

  const double duration_s = static_cast<double>(config.duration_us) * 1e-6;
  const double p_on = template_on_probability(config, label);
  for (std::uint32_t y = 0; y < config.height; ++y) {
    for (std::uint32_t x = 0; x < config.width; ++x) {
      const double rate = template_rate(config, label, x, y);
      if (!(rate > 0.0)) continue;
      double t = rng.exponential(rate);
      while (t < duration_s) {
        Event e;
        e.timestamp_us = std::min(config.duration_us, static_cast<std::uint64_t>(t * 1e6));
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.polarity = rng.bernoulli(p_on) ? 1 : 0;
        record.events.push_back(e);
        t += rng.exponential(rate);
      }
    }
  }
  std::stable_sort(record.events.begin(), record.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
  return record;
}

std::vector<EventRecord> generate_synthetic_set(const SyntheticConfig& config, std::size_t per_class,
                                                std::uint64_t seed, std::uint64_t tag) {
  config.validate();
  std::vector<EventRecord> out;
  out.reserve(per_class * config.classes);
  for (std::size_t n = 0; n < per_class; ++n) {
    for (std::uint32_t c = 0; c < config.classes; ++c) {
      SeededRng rng(seed, stream_id({tag, c, n}));
      out.push_back(generate_synthetic(c, config, rng));
    }
  }
  return out;
}

namespace {

std::uint64_t parse_header_field(const std::string& token, const std::string& key, std::size_t line) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw ParseError(line, "expected '" + prefix + "<int>' in record header, got '" + token + "'");
  }
  const std::string value = token.substr(prefix.size());
  std::size_t used = 0;
  unsigned long long parsed = 0;
  try {
    parsed = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "invalid integer for " + key + ": '" + value + "'");
  }
  if (used != value.size() || value.empty() || value[0] == '-') {
    throw ParseError(line, "invalid integer for " + key + ": '" + value + "'");
  }
  return parsed;
}

EventRecord parse_header(const std::string& text, std::size_t line) {
  std::istringstream ss(text);
  std::string hash, word, label, w, h, dur, extra;
  ss >> hash >> word >> label >> w >> h >> dur;
  if (ss >> extra) {
    throw ParseError(line, "trailing tokens in record header");
  }
  EventRecord r;
  r.label = static_cast<std::uint32_t>(parse_header_field(label, "label", line));
  r.width = static_cast<std::uint32_t>(parse_header_field(w, "w", line));
  r.height = static_cast<std::uint32_t>(parse_header_field(h, "h", line));
  r.duration_us = parse_header_field(dur, "dur_us", line);
  if (r.width == 0 || r.height == 0 || r.duration_us == 0) {
    throw ParseError(line, "record header needs positive w, h and dur_us");
  }
  return r;
}

Event parse_event(const std::string& text, std::size_t line) {
  std::istringstream ss(text);
  long long ts = -1, x = -1, y = -1, p = -1;
  std::string extra;
  if (!(ss >> ts >> x >> y >> p) || (ss >> extra)) {
    throw ParseError(line, "expected '<timestamp_us> <x> <y> <polarity>', got '" + text + "'");
  }
  if (ts < 0 || x < 0 || y < 0 || x > 0xffff || y > 0xffff || (p != 0 && p != 1)) {
    throw ParseError(line, "field out of range in '" + text + "'");
  }
  Event e;
  e.timestamp_us = static_cast<std::uint64_t>(ts);
  e.x = static_cast<std::uint16_t>(x);
  e.y = static_cast<std::uint16_t>(y);
  e.polarity = static_cast<std::uint8_t>(p);
  return e;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<EventRecord> parse_events(std::istream& in) {
  std::vector<EventRecord> records;
  std::optional<EventRecord> open;
  std::size_t header_line = 0;
  auto close = [&] {
    if (!open) return;
    std::stable_sort(open->events.begin(), open->events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
    try {
      open->validate();
    } catch (const ValidationError& e) {
      throw ValidationError("record starting at line " + std::to_string(header_line) + ": " + e.what());
    }
    records.push_back(std::move(*open));
    open.reset();
  };

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (is_blank(text)) {
      close();
      continue;
    }
    if (text[0] == '#') {
      std::istringstream ss(text);
      std::string hash, word;
      ss >> hash >> word;
      if (hash == "#" && word == "record") {
        close();
        open = parse_header(text, line);
        header_line = line;
      }
      continue;
    }
    if (!open) {
      throw ParseError(line, "event line outside a record");
    }
    const Event e = parse_event(text, line);
    if (e.x >= open->width || e.y >= open->height) {
      throw ValidationError("line " + std::to_string(line) + ": pixel outside record geometry");
    }
    if (e.timestamp_us > open->duration_us) {
      throw ValidationError("line " + std::to_string(line) + ": timestamp beyond record duration");
    }
    open->events.push_back(e);
  }
  close();
  return records;
}

std::vector<EventRecord> load_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open event file " + path.string());
  }
  return parse_events(in);
}

void write_events(std::ostream& out, std::span<const EventRecord> records) {
  out << "# vdib events v1\n";
  for (const EventRecord& r : records) {
    out << "# record label=" << r.label << " w=" << r.width << " h=" << r.height << " dur_us=" << r.duration_us
        << '\n';
    for (const Event& e : r.events) {
      out << e.timestamp_us << ' ' << e.x << ' ' << e.y << ' ' << static_cast<int>(e.polarity) << '\n';
    }
    out << '\n';
  }
}

void save_events(const std::filesystem::path& path, std::span<const EventRecord> records) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write event file " + path.string());
  }
  write_events(out, records);
}

std::size_t convert_to_file(EventSource& source, const std::filesystem::path& path) {
  std::vector<EventRecord> records;
  while (auto r = source.next()) {
    r->validate();
    records.push_back(std::move(*r));
  }
  save_events(path, records);
  return records.size();
}

FrameTensor events_to_frames(const EventRecord& record, long steps) {
  if (steps <= 0) {
    throw DomainError("events_to_frames: T must be >= 1");
  }
  if (record.duration_us == 0) {
    throw DomainError("events_to_frames: record duration must be positive");
  }
  const auto t_count = static_cast<std::uint64_t>(steps);
  FrameTensor frames(t_count, record.height, record.width);
  for (const Event& e : record.events) {
    const auto scaled = static_cast<unsigned __int128>(e.timestamp_us) * t_count / record.duration_us;
    const std::uint64_t bin = std::min<std::uint64_t>(static_cast<std::uint64_t>(scaled), t_count - 1);
    frames.set(bin, e.polarity, e.y, e.x);
  }
  return frames;
}

}  // namespace vdib
