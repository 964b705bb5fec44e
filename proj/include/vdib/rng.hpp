// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace vdib {

/// Reproducible random source addressed by (seed, stream_id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; all derived draws (uniform, Bernoulli, exponential, bounded
/// integers) are computed here rather than through <random> distributions,
/// whose algorithms differ between standard library vendors.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// True with probability p; p <= 0 never, p >= 1 always.
  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential waiting time with the given rate (> 0).
  double exponential(double rate);

  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Folds a list of tags (purpose, epoch, index, ...) into one stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> tags);

}  // namespace vdib
