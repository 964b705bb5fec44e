// SPDX-License-Identifier: Apache-2.0
//
// Helpers for tests on tiny encoder instances: random parameters, raw input
// sequences, teacher-forced rollouts and exhaustive enumeration of received
// sequences.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vdib/channel.hpp"
#include "vdib/decoder.hpp"
#include "vdib/encoder.hpp"
#include "vdib/rng.hpp"

namespace vdib::testing {

/// T rows of n_in input bits.
using InputSeq = std::vector<std::vector<std::uint8_t>>;

inline double uniform_in(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline EncoderParams tiny_params(std::size_t k, std::size_t n_in, std::size_t wa, std::size_t wb, SeededRng& rng) {
  EncoderParams p;
  p.k = k;
  p.n_in = n_in;
  for (std::size_t i = 0; i < k * n_in; ++i) p.w_ff.push_back(uniform_in(rng, -1.5, 1.5));
  for (std::size_t i = 0; i < k; ++i) p.w_fb.push_back(uniform_in(rng, -2.0, 1.0));
  for (std::size_t i = 0; i < k; ++i) p.gamma.push_back(uniform_in(rng, -1.0, 1.0));
  for (std::size_t d = 0; d < wa; ++d) p.kernel_a.coefficients.push_back(uniform_in(rng, 0.1, 1.0));
  for (std::size_t d = 0; d < wb; ++d) p.kernel_b.coefficients.push_back(uniform_in(rng, 0.1, 1.0));
  p.validate();
  return p;
}

inline InputSeq random_inputs(std::size_t steps, std::size_t n_in, SeededRng& rng, double p = 0.5) {
  InputSeq s(steps, std::vector<std::uint8_t>(n_in));
  for (auto& row : s) {
    for (auto& b : row) b = rng.bernoulli(p) ? 1 : 0;
  }
  return s;
}

/// Parameters in block order: w_ff, w_fb, gamma.
inline std::vector<double> pack(const EncoderParams& p) {
  std::vector<double> x(p.w_ff);
  x.insert(x.end(), p.w_fb.begin(), p.w_fb.end());
  x.insert(x.end(), p.gamma.begin(), p.gamma.end());
  return x;
}

inline void unpack(EncoderParams& p, std::span<const double> x) {
  std::size_t o = 0;
  for (double& v : p.w_ff) v = x[o++];
  for (double& v : p.w_fb) v = x[o++];
  for (double& v : p.gamma) v = x[o++];
}

inline std::vector<double> pack(const EncoderGradAccumulator& g) {
  std::vector<double> x(g.g_w_ff);
  x.insert(x.end(), g.g_w_fb.begin(), g.g_w_fb.end());
  x.insert(x.end(), g.g_gamma.begin(), g.g_gamma.end());
  return x;
}

struct TeacherForced {
  double log_lik = 0.0;
  std::vector<double> u;  // T x k
  EncoderGradAccumulator score;
};

/// Runs the encoder with `zhat` as its own history and returns
/// log p(zhat || x), the potentials and the accumulated score.
inline TeacherForced teacher_force(const EncoderParams& params, const InputSeq& inputs, const SpikeTrain& zhat,
                                   double epsilon) {
  TeacherForced out;
  out.score = EncoderGradAccumulator(params);
  EncoderState state(params);
  std::vector<double> u(params.k);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    state.begin_step(inputs[t]);
    membrane_potentials(params, state, u);
    out.log_lik += log_prob_noisy(zhat.row(t), u, epsilon);
    accumulate_score(out.score, zhat.row(t), u, state, epsilon);
    out.u.insert(out.u.end(), u.begin(), u.end());
    state.end_step(zhat.row(t));
  }
  return out;
}

/// Every binary T x k train, in counting order.
inline std::vector<SpikeTrain> all_trains(std::size_t steps, std::size_t k) {
  const std::size_t bits = steps * k;
  std::vector<SpikeTrain> out;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    SpikeTrain z(steps, k);
    for (std::size_t b = 0; b < bits; ++b) z.bits[b] = (code >> b) & 1U;
    out.push_back(std::move(z));
  }
  return out;
}

/// |got - want| within rel * |want| plus a tiny absolute floor for near-zero entries.
inline bool close_rel(double got, double want, double rel, double floor = 1e-10) {
  return std::abs(got - want) <= rel * std::abs(want) + floor;
}

}  // namespace vdib::testing
