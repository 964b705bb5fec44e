// SPDX-License-Identifier: Apache-2.0
//
// Binary symmetric channel: one channel use per read-out neuron per step.

#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "vdib/encoder.hpp"
#include "vdib/numerics.hpp"
#include "vdib/rng.hpp"

namespace vdib {

/// Either a crossover probability or an Eb/N0 in dB, never both.
struct ChannelConfig {
  std::optional<double> epsilon;
  std::optional<double> ebn0_db;
  EpsilonMapping mapping = &ebn0_to_epsilon;

  static ChannelConfig from_epsilon(double epsilon);
  static ChannelConfig from_ebn0_db(double ebn0_db, EpsilonMapping mapping = &ebn0_to_epsilon);

  /// The linear crossover probability, validated to lie in [0, 0.5].
  double crossover() const;
};

/// Flips each bit independently with probability epsilon in [0, 1].
SpikeVector transmit(std::span<const std::uint8_t> z, double epsilon, SeededRng& rng);

/// P(zhat = 1) = p (1 - eps) + (1 - p) eps, i.e. p - 2 p eps + eps.
double noisy_spike_prob(double p, double epsilon);

/// log P(zhat = bit | u) through the channel, computed in log space.
double log_prob_noisy(std::uint8_t zhat, double u, double epsilon);

/// sum_i log P(zhat_i | u_i) through the channel; epsilon in [0, 0.5].
double log_prob_noisy(std::span<const std::uint8_t> zhat, std::span<const double> u, double epsilon);

/// Draws zhat_i ~ Bern(noisy_spike_prob(sigmoid(u_i), epsilon)) directly.
SpikeVector sample_noisy(std::span<const double> u, double epsilon, SeededRng& rng);

}  // namespace vdib
