// SPDX-License-Identifier: Apache-2.0

#include "vdib/encoder.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "vdib/kernels.hpp"

namespace vdib {

std::vector<std::span<double>> EncoderParams::blocks() {
  return {std::span<double>(w_ff), std::span<double>(w_fb), std::span<double>(gamma)};
}

void EncoderParams::validate() const {
  if (k == 0 || n_in == 0) throw std::invalid_argument("encoder: k and n_in must be positive");
  if (w_ff.size() != k * n_in || w_fb.size() != k || gamma.size() != k) {
    throw std::invalid_argument("encoder: parameter shapes inconsistent with k and n_in");
  }
  kernel_a.validate();
  kernel_b.validate();
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(w_ff) || !finite(w_fb) || !finite(gamma)) {
    throw std::invalid_argument("encoder: non-finite parameter");
  }
}

EncoderParams init_encoder(std::size_t k, std::size_t n_in, Kernel kernel_a, Kernel kernel_b, SeededRng& rng,
                           const EncoderInit& init) {
  if (!(init.initial_rate > 0.0 && init.initial_rate < 1.0)) {
    throw DomainError("init_encoder: initial_rate must lie in (0, 1)");
  }
  EncoderParams p;
  p.k = k;
  p.n_in = n_in;
  p.kernel_a = std::move(kernel_a);
  p.kernel_b = std::move(kernel_b);
  const double r = init.ff_range_scale / std::sqrt(static_cast<double>(n_in));
  p.w_ff.resize(k * n_in);
  for (double& w : p.w_ff) {
    w = (2.0 * rng.uniform() - 1.0) * r;
  }
  p.w_fb.assign(k, init.feedback_weight);
  p.gamma.assign(k, std::log(init.initial_rate / (1.0 - init.initial_rate)));
  p.validate();
  return p;
}

EncoderState::EncoderState(const EncoderParams& params)
    : k_(params.k),
      n_in_(params.n_in),
      depth_(std::max(params.kernel_a.window(), params.kernel_b.window())),
      kernel_a_(params.kernel_a.coefficients),
      kernel_b_(params.kernel_b.coefficients),
      input_ring_(depth_ * n_in_, 0),
      output_ring_(depth_ * k_, 0),
      input_trace_(n_in_, 0.0),
      feedback_trace_(k_, 0.0) {}

void EncoderState::reset() {
  std::fill(input_ring_.begin(), input_ring_.end(), 0);
  std::fill(output_ring_.begin(), output_ring_.end(), 0);
  std::fill(input_trace_.begin(), input_trace_.end(), 0.0);
  std::fill(feedback_trace_.begin(), feedback_trace_.end(), 0.0);
  t_ = 0;
  in_step_ = false;
}

std::span<const std::uint8_t> EncoderState::input_row(long step) const {
  const auto slot = static_cast<std::size_t>(step) % depth_;
  return std::span<const std::uint8_t>(input_ring_).subspan(slot * n_in_, n_in_);
}

std::span<const std::uint8_t> EncoderState::output_row(long step) const {
  const auto slot = static_cast<std::size_t>(step) % depth_;
  return std::span<const std::uint8_t>(output_ring_).subspan(slot * k_, k_);
}

void EncoderState::begin_step(std::span<const std::uint8_t> input) {
  if (input.size() != n_in_) throw std::invalid_argument("EncoderState: input size mismatch");
  if (in_step_) throw std::logic_error("EncoderState: begin_step called twice without end_step");
  const auto slot = static_cast<std::size_t>(t_) % depth_;
  std::copy(input.begin(), input.end(), input_ring_.begin() + static_cast<std::ptrdiff_t>(slot * n_in_));

  // Same accumulation order as causal_convolve: delay 0 first.
  std::fill(input_trace_.begin(), input_trace_.end(), 0.0);
  const long last_a = std::min<long>(static_cast<long>(kernel_a_.size()) - 1, t_);
  for (long d = 0; d <= last_a; ++d) {
    kernels::axpy_u8(kernel_a_[static_cast<std::size_t>(d)], input_row(t_ - d), input_trace_);
  }

  std::fill(feedback_trace_.begin(), feedback_trace_.end(), 0.0);
  const long last_b = std::min<long>(static_cast<long>(kernel_b_.size()) - 1, t_ - 1);
  for (long d = 0; d <= last_b; ++d) {
    kernels::axpy_u8(kernel_b_[static_cast<std::size_t>(d)], output_row(t_ - 1 - d), feedback_trace_);
  }
  in_step_ = true;
}

void EncoderState::end_step(std::span<const std::uint8_t> spikes) {
  if (spikes.size() != k_) throw std::invalid_argument("EncoderState: spike vector size mismatch");
  if (!in_step_) throw std::logic_error("EncoderState: end_step without begin_step");
  const auto slot = static_cast<std::size_t>(t_) % depth_;
  std::copy(spikes.begin(), spikes.end(), output_ring_.begin() + static_cast<std::ptrdiff_t>(slot * k_));
  ++t_;
  in_step_ = false;
}

void membrane_potentials(const EncoderParams& params, const EncoderState& state, std::span<double> u) {
  if (u.size() != params.k || state.input_trace().size() != params.n_in ||
      state.feedback_trace().size() != params.k) {
    throw std::invalid_argument("membrane_potentials: shape mismatch");
  }
  const auto trace = state.input_trace();
  const auto fb = state.feedback_trace();
  for (std::size_t i = 0; i < params.k; ++i) {
    u[i] = kernels::dot(params.ff_row(i), trace) + params.w_fb[i] * fb[i] + params.gamma[i];
  }
}

SpikeVector sample_spikes(std::span<const double> u, SeededRng& rng) {
  SpikeVector z(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    z[i] = rng.bernoulli(sigmoid(u[i])) ? 1 : 0;
  }
  return z;
}

double log_prob_clean(std::span<const std::uint8_t> z, std::span<const double> u) {
  if (z.size() != u.size()) throw std::invalid_argument("log_prob_clean: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    acc += z[i] ? log_sigmoid(u[i]) : log_sigmoid(-u[i]);
  }
  return acc;
}

double grad_u_log_prob_noisy(std::uint8_t zhat, double u, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw DomainError("grad_u_log_prob_noisy: epsilon must lie in [0, 0.5); at 0.5 the channel output is independent of u");
  }
  const double s = sigmoid(u);
  if (epsilon == 0.0) {
    return static_cast<double>(zhat) - s;
  }
  // The printed form z/(s + e/(1-2e)) + (1-z)/(s + (e-1)/(1-2e)), times s(1-s),
  // multiplied through by (1-2e) so both denominators stay >= e > 0.
  const double s_bar = sigmoid(-u);
  const double c = 1.0 - 2.0 * epsilon;
  const double slope = c * s * s_bar;
  return zhat ? slope / (c * s + epsilon) : -slope / (c * s_bar + epsilon);
}

std::vector<double> grad_u_log_prob_noisy(std::span<const std::uint8_t> zhat, std::span<const double> u,
                                          double epsilon) {
  if (zhat.size() != u.size()) throw std::invalid_argument("grad_u_log_prob_noisy: shape mismatch");
  std::vector<double> g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    g[i] = grad_u_log_prob_noisy(zhat[i], u[i], epsilon);
  }
  return g;
}

PotentialGradient grad_params_u(const EncoderParams& params, const EncoderState& state, std::size_t neuron) {
  if (neuron >= params.k) throw std::out_of_range("grad_params_u: neuron index");
  PotentialGradient g;
  g.w_ff = state.input_trace();
  g.w_fb = state.feedback_trace()[neuron];
  g.gamma = 1.0;
  return g;
}

EncoderGradAccumulator::EncoderGradAccumulator(const EncoderParams& params)
    : k(params.k),
      n_in(params.n_in),
      g_w_ff(params.k * params.n_in, 0.0),
      g_w_fb(params.k, 0.0),
      g_gamma(params.k, 0.0) {}

void EncoderGradAccumulator::reset() {
  std::fill(g_w_ff.begin(), g_w_ff.end(), 0.0);
  std::fill(g_w_fb.begin(), g_w_fb.end(), 0.0);
  std::fill(g_gamma.begin(), g_gamma.end(), 0.0);
}

void EncoderGradAccumulator::scale(double factor) {
  for (auto block : blocks()) {
    for (double& v : block) v *= factor;
  }
}

void EncoderGradAccumulator::add_scaled(const EncoderGradAccumulator& other, double factor) {
  if (other.k != k || other.n_in != n_in) throw std::invalid_argument("EncoderGradAccumulator: shape mismatch");
  kernels::axpy(factor, other.g_w_ff, g_w_ff);
  kernels::axpy(factor, other.g_w_fb, g_w_fb);
  kernels::axpy(factor, other.g_gamma, g_gamma);
}

std::vector<std::span<double>> EncoderGradAccumulator::blocks() {
  return {std::span<double>(g_w_ff), std::span<double>(g_w_fb), std::span<double>(g_gamma)};
}

std::vector<std::span<const double>> EncoderGradAccumulator::blocks() const {
  return {std::span<const double>(g_w_ff), std::span<const double>(g_w_fb), std::span<const double>(g_gamma)};
}

bool EncoderGradAccumulator::matches(const EncoderParams& params) const {
  return k == params.k && n_in == params.n_in && g_w_ff.size() == params.w_ff.size() &&
         g_w_fb.size() == params.k && g_gamma.size() == params.k;
}

void accumulate_score(EncoderGradAccumulator& acc, std::span<const std::uint8_t> zhat_t,
                      std::span<const double> u_t, const EncoderState& state, double epsilon) {
  if (zhat_t.size() != acc.k || u_t.size() != acc.k || state.input_trace().size() != acc.n_in ||
      acc.g_w_ff.size() != acc.k * acc.n_in) {
    throw std::invalid_argument("accumulate_score: accumulator shape mismatch");
  }
  const auto trace = state.input_trace();
  const auto fb = state.feedback_trace();
  for (std::size_t i = 0; i < acc.k; ++i) {
    const double g = grad_u_log_prob_noisy(zhat_t[i], u_t[i], epsilon);
    if (g == 0.0) continue;
    kernels::axpy(g, trace, std::span<double>(acc.g_w_ff).subspan(i * acc.n_in, acc.n_in));
    acc.g_w_fb[i] += g * fb[i];
    acc.g_gamma[i] += g;
  }
}

}  // namespace vdib
