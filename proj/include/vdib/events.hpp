// SPDX-License-Identifier: Apache-2.0
//
// Event-camera records, the synthetic oriented-bar task, the line-oriented
// event file format and event-to-frame binning.
//
// File format (text):
//
//   # any comment line
//   # record label=<int> w=<int> h=<int> dur_us=<int>
//   <timestamp_us> <x> <y> <polarity>
//   ...
//   <blank line ends the record>
//
// Lines starting with "#" that are not record headers are comments. Events
// must satisfy x < w, y < h, polarity in {0,1} and timestamp <= dur_us.
// Externally converted N-MNIST / MNIST-DVS data enters through EventSource
// (cropping and centering are the converter's job).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdib/errors.hpp"
#include "vdib/rng.hpp"

namespace vdib {

struct Event {
  std::uint64_t timestamp_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t polarity = 0;  // 1 = luminance increase

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventRecord {
  std::vector<Event> events;  // sorted by timestamp
  std::uint32_t label = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t duration_us = 0;

  /// Throws ValidationError on out-of-range pixels, polarity, timestamps or order.
  void validate() const;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Binary T x 2 x H x W tensor, index order (bin, polarity, y, x).
class FrameTensor {
 public:
  FrameTensor(std::size_t steps, std::size_t height, std::size_t width);

  std::size_t steps() const { return steps_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  /// 2 * H * W, the encoder input dimension.
  std::size_t step_size() const { return 2 * height_ * width_; }

  std::uint8_t at(std::size_t bin, std::size_t polarity, std::size_t y, std::size_t x) const {
    return data_[index(bin, polarity, y, x)];
  }
  void set(std::size_t bin, std::size_t polarity, std::size_t y, std::size_t x) {
    data_[index(bin, polarity, y, x)] = 1;
  }

  std::span<const std::uint8_t> step(std::size_t bin) const {
    return std::span<const std::uint8_t>(data_).subspan(bin * step_size(), step_size());
  }
  std::span<const std::uint8_t> data() const { return data_; }
  std::size_t total() const;

 private:
  std::size_t index(std::size_t bin, std::size_t polarity, std::size_t y, std::size_t x) const {
    return ((bin * 2 + polarity) * height_ + y) * width_ + x;
  }

  std::size_t steps_;
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> data_;
};

/// Oriented-bar classes: class c is a bar through the image centre at angle
/// pi * c / classes, blurred with a Gaussian profile of width bar_sigma.
struct SyntheticConfig {
  std::uint32_t classes = 4;
  std::uint32_t width = 16;
  std::uint32_t height = 16;
  std::uint64_t duration_us = 100000;
  double bar_rate_hz = 60.0;         // peak per-pixel event rate on the bar
  double background_rate_hz = 4.0;   // per-pixel noise rate everywhere
  double bar_sigma = 1.0;            // pixels

  void validate() const;
};

/// Per-pixel event rate (Hz) of the class template.
double template_rate(const SyntheticConfig& config, std::uint32_t label, std::uint32_t x, std::uint32_t y);

/// Probability that an event of this class has polarity 1.
double template_on_probability(const SyntheticConfig& config, std::uint32_t label);

/// Poisson events with the class template's rate map, one independent
/// process per pixel, merged and stably sorted by timestamp.
EventRecord generate_synthetic(std::uint32_t label, const SyntheticConfig& config, SeededRng& rng);

/// `per_class` records of every class, interleaved by class; record n of
/// class c uses stream (tag, c, n) of `seed`.
std::vector<EventRecord> generate_synthetic_set(const SyntheticConfig& config, std::size_t per_class,
                                                std::uint64_t seed, std::uint64_t tag);

std::vector<EventRecord> load_events(const std::filesystem::path& path);
std::vector<EventRecord> parse_events(std::istream& in);
void save_events(const std::filesystem::path& path, std::span<const EventRecord> records);
void write_events(std::ostream& out, std::span<const EventRecord> records);

/// Converter hook for external datasets: yield records one at a time.
class EventSource {
 public:
  virtual ~EventSource() = default;
  virtual std::optional<EventRecord> next() = 0;
};

/// Drains `source` into an event file; returns the number of records written.
std::size_t convert_to_file(EventSource& source, const std::filesystem::path& path);

/// Uniform time bins; an event at ts lands in floor(ts * T / duration),
/// clamped to T - 1. Cells hit by at least one event are set to 1.
FrameTensor events_to_frames(const EventRecord& record, long steps);

}  // namespace vdib
