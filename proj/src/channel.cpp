// SPDX-License-Identifier: Apache-2.0

#include "vdib/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "vdib/errors.hpp"

namespace vdib {

ChannelConfig ChannelConfig::from_epsilon(double epsilon) {
  ChannelConfig c;
  c.epsilon = epsilon;
  return c;
}

ChannelConfig ChannelConfig::from_ebn0_db(double ebn0_db, EpsilonMapping mapping) {
  ChannelConfig c;
  c.ebn0_db = ebn0_db;
  c.mapping = mapping;
  return c;
}

double ChannelConfig::crossover() const {
  if (epsilon.has_value() == ebn0_db.has_value()) {
    throw ConfigError("channel: set exactly one of epsilon or ebn0_db");
  }
  double e = 0.0;
  if (epsilon) {
    e = *epsilon;
  } else {
    if (std::isnan(*ebn0_db)) throw ConfigError("channel: ebn0_db is NaN");
    e = mapping(*ebn0_db == -std::numeric_limits<double>::infinity() ? 0.0 : db_to_linear(*ebn0_db));
  }
  if (!(e >= 0.0 && e <= 0.5)) {
    throw ConfigError("channel: crossover probability must lie in [0, 0.5]");
  }
  return e;
}

SpikeVector transmit(std::span<const std::uint8_t> z, double epsilon, SeededRng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("transmit: epsilon must lie in [0, 1]");
  SpikeVector out(z.begin(), z.end());
  for (auto& bit : out) {
    if (rng.bernoulli(epsilon)) bit ^= 1;
  }
  return out;
}

double noisy_spike_prob(double p, double epsilon) { return p * (1.0 - epsilon) + (1.0 - p) * epsilon; }

double log_prob_noisy(std::uint8_t zhat, double u, double epsilon) {
  // log(eps + (1 - 2 eps) sigmoid(+-u)); the eps = 0 case reduces to log_sigmoid.
  const double log_signal = std::log1p(-2.0 * epsilon) + (zhat ? log_sigmoid(u) : log_sigmoid(-u));
  const double log_flip = epsilon > 0.0 ? std::log(epsilon) : -std::numeric_limits<double>::infinity();
  return log_add_exp(log_flip, log_signal);
}

double log_prob_noisy(std::span<const std::uint8_t> zhat, std::span<const double> u, double epsilon) {
  if (zhat.size() != u.size()) throw std::invalid_argument("log_prob_noisy: shape mismatch");
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw DomainError("log_prob_noisy: epsilon must lie in [0, 0.5]");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += log_prob_noisy(zhat[i], u[i], epsilon);
  }
  return acc;
}

SpikeVector sample_noisy(std::span<const double> u, double epsilon, SeededRng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw DomainError("sample_noisy: epsilon must lie in [0, 0.5]");
  SpikeVector zhat(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    zhat[i] = rng.bernoulli(noisy_spike_prob(sigmoid(u[i]), epsilon)) ? 1 : 0;
  }
  return zhat;
}

}  // namespace vdib
