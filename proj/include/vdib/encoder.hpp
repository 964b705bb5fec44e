// SPDX-License-Identifier: Apache-2.0
//
// Single-layer probabilistic spiking encoder (GLM neurons).
//
// Neuron i at step t has membrane potential
//
//   u[i,t] = sum_j W[i,j] (a * s_j)[t] + w_fb[i] (b * z_i)[t-1] + gamma[i]
//
// where s are the binary inputs, z the neuron's own past spikes, and a, b the
// feedforward and feedback kernels. It spikes with probability sigmoid(u).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vdib/numerics.hpp"
#include "vdib/rng.hpp"

namespace vdib {

using SpikeVector = std::vector<std::uint8_t>;

struct EncoderParams {
  std::size_t k = 0;     // read-out neurons
  std::size_t n_in = 0;  // input neurons (2 * H * W)
  std::vector<double> w_ff;   // k x n_in, row-major; row i feeds neuron i
  std::vector<double> w_fb;   // k
  std::vector<double> gamma;  // k
  Kernel kernel_a;
  Kernel kernel_b;

  std::span<double> ff_row(std::size_t i) { return std::span<double>(w_ff).subspan(i * n_in, n_in); }
  std::span<const double> ff_row(std::size_t i) const {
    return std::span<const double>(w_ff).subspan(i * n_in, n_in);
  }

  /// Trainable blocks in checkpoint / optimizer order: w_ff, w_fb, gamma.
  std::vector<std::span<double>> blocks();

  void validate() const;
};

struct EncoderInit {
  double ff_range_scale = 1.0;    // W ~ U(-s/sqrt(n_in), s/sqrt(n_in))
  double feedback_weight = -1.0;
  double initial_rate = 0.5;      // gamma = logit(initial_rate)
};

EncoderParams init_encoder(std::size_t k, std::size_t n_in, Kernel kernel_a, Kernel kernel_b, SeededRng& rng,
                           const EncoderInit& init = {});

/// Spike histories held in ring buffers of depth max(W_a, W_b). Each step the
/// caller pushes the input frame, reads potentials, then pushes the emitted
/// spikes.
class EncoderState {
 public:
  explicit EncoderState(const EncoderParams& params);

  void reset();

  /// Records input s_t and refreshes both filtered traces for step t.
  void begin_step(std::span<const std::uint8_t> input);

  /// Records the neuron outputs of step t and advances to t + 1.
  void end_step(std::span<const std::uint8_t> spikes);

  /// (a * s_j)[t] for every input j; valid after begin_step.
  std::span<const double> input_trace() const { return input_trace_; }
  /// (b * z_i)[t-1] for every neuron i; valid after begin_step.
  std::span<const double> feedback_trace() const { return feedback_trace_; }

  long t() const { return t_; }
  std::size_t depth() const { return depth_; }

 private:
  std::span<const std::uint8_t> input_row(long step) const;
  std::span<const std::uint8_t> output_row(long step) const;

  std::size_t k_;
  std::size_t n_in_;
  std::size_t depth_;
  std::vector<double> kernel_a_;
  std::vector<double> kernel_b_;
  std::vector<std::uint8_t> input_ring_;
  std::vector<std::uint8_t> output_ring_;
  std::vector<double> input_trace_;
  std::vector<double> feedback_trace_;
  long t_ = 0;
  bool in_step_ = false;
};

/// Writes u_t (length k) into `u`.
void membrane_potentials(const EncoderParams& params, const EncoderState& state, std::span<double> u);

/// Each bit independently 1 with probability sigmoid(u_i).
SpikeVector sample_spikes(std::span<const double> u, SeededRng& rng);

/// sum_i log Bern(z_i; sigmoid(u_i)).
double log_prob_clean(std::span<const std::uint8_t> z, std::span<const double> u);

/// d/du_i of log P(zhat_i | u_i) through a BSC with crossover epsilon.
/// Requires epsilon in [0, 0.5); at epsilon = 0 this is zhat - sigmoid(u).
std::vector<double> grad_u_log_prob_noisy(std::span<const std::uint8_t> zhat, std::span<const double> u,
                                          double epsilon);
double grad_u_log_prob_noisy(std::uint8_t zhat, double u, double epsilon);

/// Partial derivatives of u[i,t] with respect to neuron i's parameters.
struct PotentialGradient {
  std::span<const double> w_ff;  // d u / d W[i, j] for all j
  double w_fb = 0.0;
  double gamma = 1.0;
};

PotentialGradient grad_params_u(const EncoderParams& params, const EncoderState& state, std::size_t neuron);

struct EncoderGradAccumulator {
  std::size_t k = 0;
  std::size_t n_in = 0;
  std::vector<double> g_w_ff;
  std::vector<double> g_w_fb;
  std::vector<double> g_gamma;

  EncoderGradAccumulator() = default;
  explicit EncoderGradAccumulator(const EncoderParams& params);

  void reset();
  void scale(double factor);
  /// this += factor * other
  void add_scaled(const EncoderGradAccumulator& other, double factor);
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  bool matches(const EncoderParams& params) const;
};

/// Adds d/dphi log P(zhat_t | u_t) for one step (chain rule through u).
void accumulate_score(EncoderGradAccumulator& acc, std::span<const std::uint8_t> zhat_t,
                      std::span<const double> u_t, const EncoderState& state, double epsilon);

}  // namespace vdib
