// SPDX-License-Identifier: Apache-2.0
//
// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any
// fails. Criteria 1-6 are exact or statistical checks on tiny instances;
// 7-10 train the default synthetic task.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "vdib/channel.hpp"
#include "vdib/config.hpp"
#include "vdib/decoder.hpp"
#include "vdib/encoder.hpp"
#include "vdib/experiments.hpp"
#include "vdib/numerics.hpp"
#include "vdib/trainer.hpp"

using namespace vdib;
using namespace vdib::testing;

namespace {

// Upper 1% points of chi-square, indexed by degrees of freedom.
double chi2_crit_99(std::size_t df) {
  static const std::array<double, 8> table{0.0, 6.634896601021214, 9.21034037197618, 11.344866730144373,
                                           13.276704135987622, 15.08627246938899, 16.811893829770927,
                                           18.475306906582357};
  return table.at(df);
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.3f") {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(f, x);
  return s;
}

// ---- criterion 1 -----------------------------------------------------------

Outcome channel_marginal() {
  double worst_norm = 0.0;
  bool exact = true;
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto outcomes = all_trains(1, k);
    for (double eps : {0.0, 0.1, 0.25, 0.4}) {
      for (double a = -8.0; a <= 8.0; a += 0.5) {
        std::vector<double> u(k);
        for (std::size_t i = 0; i < k; ++i) u[i] = a + 1.37 * static_cast<double>(i) - 1.1;
        double total = 0.0;
        for (const auto& z : outcomes) total += std::exp(log_prob_noisy(z.row(0), u, eps));
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
        for (double x : u) {
          const double p = sigmoid(x);
          exact = exact && noisy_spike_prob(p, eps) == p * (1.0 - eps) + (1.0 - p) * eps;
        }
      }
    }
  }
  return {worst_norm <= 1e-12 && exact,
          "max |sum - 1| = " + fmt("%.2e", worst_norm) + ", two-term marginal exact: " + (exact ? "yes" : "no")};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome gradient_closed_forms() {
  double worst_u = 0.0;
  for (double eps : {0.0, 0.1, 0.25, 0.4}) {
    for (double u = -4.0; u <= 4.0; u += 0.25) {
      for (std::uint8_t z : {std::uint8_t{0}, std::uint8_t{1}}) {
        const double h = 1e-5;
        const double fd = (log_prob_noisy(z, u + h, eps) - log_prob_noisy(z, u - h, eps)) / (2 * h);
        worst_u = std::max(worst_u, std::abs(grad_u_log_prob_noisy(z, u, eps) - fd));
      }
    }
  }

  double worst_rel = 0.0;
  std::size_t bad = 0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    SeededRng rng(2024, draw);
    DecoderParams p = init_decoder(4, 3, 2, rng);  // k = 2, T = 2, C = 2, hidden 3
    for (double& b : p.b1) b = uniform_in(rng, -0.5, 0.5);
    for (double& b : p.b2) b = uniform_in(rng, -0.5, 0.5);
    ReceiveBuffer buf(2, 2);
    for (auto& bit : buf.bits) bit = rng.bernoulli(0.5) ? 1 : 0;
    const std::size_t label = rng.below(2);
    const DecoderGrad g = backward(p, forward(p, buf), label);
    std::vector<double> got;
    for (auto block : g.blocks()) got.insert(got.end(), block.begin(), block.end());
    std::size_t i = 0;
    for (auto block : p.blocks()) {
      for (double& x : block) {
        const double keep = x, h = 1e-5;
        x = keep + h;
        const double up = classification_loss(forward(p, buf), label, p.output);
        x = keep - h;
        const double down = classification_loss(forward(p, buf), label, p.output);
        x = keep;
        const double fd = (up - down) / (2 * h);
        const double err = std::abs(got[i] - fd);
        if (std::abs(fd) > 1e-9) worst_rel = std::max(worst_rel, err / std::abs(fd));
        if (err > 1e-6 * std::abs(fd) + 1e-9) ++bad;
        ++i;
      }
    }
  }
  return {worst_u <= 1e-7 && bad == 0, "du score max abs err " + fmt("%.2e", worst_u) +
                                           "; decoder max rel err " + fmt("%.2e", worst_rel) + " over 100 draws"};
}

// ---- criterion 3 -----------------------------------------------------------

FrameTensor pixel_frames(std::size_t steps, SeededRng& rng) {
  FrameTensor f(steps, 1, 1);  // two inputs per step: one pixel, both polarities
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t pol = 0; pol < 2; ++pol) {
      if (rng.bernoulli(0.5)) f.set(t, pol, 0, 0);
    }
  }
  return f;
}

InputSeq as_inputs(const FrameTensor& f) {
  InputSeq s;
  for (std::size_t t = 0; t < f.steps(); ++t) s.emplace_back(f.step(t).begin(), f.step(t).end());
  return s;
}

struct Tiny {
  EncoderParams enc;
  DecoderParams dec;
  FrameTensor frames{1, 1, 1};
  std::size_t label = 0;
  double eps = 0.1;
  double beta = 0.1;
  PriorModel prior{0.3};

  double loss(const SpikeTrain& z, const TeacherForced& tf) const {
    return vdib_loss(classification_loss(forward(dec, z), label, dec.output), regularizer(z, tf.u, eps, prior),
                     beta);
  }
  double expected_loss(const EncoderParams& p) const {
    double total = 0.0;
    for (const auto& z : all_trains(frames.steps(), p.k)) {
      const auto tf = teacher_force(p, as_inputs(frames), z, eps);
      total += std::exp(tf.log_lik) * loss(z, tf);
    }
    return total;
  }
  std::vector<double> expected_estimator() const {
    std::vector<double> g(pack(enc).size(), 0.0);
    for (const auto& z : all_trains(frames.steps(), enc.k)) {
      const auto tf = teacher_force(enc, as_inputs(frames), z, eps);
      const auto est = pack(encoder_gradient(loss(z, tf), tf.score));
      const double w = std::exp(tf.log_lik);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * est[i];
    }
    return g;
  }
};

Tiny make_tiny(std::uint64_t seed, std::size_t k, std::size_t steps, double eps, double beta) {
  SeededRng rng(seed, 0);
  Tiny t;
  t.enc = tiny_params(k, 2, 4, 3, rng);
  t.frames = pixel_frames(steps, rng);
  t.dec = init_decoder(k * steps, 6, 3, rng);
  for (double& b : t.dec.b1) b = uniform_in(rng, 0.1, 0.5);
  t.label = seed % 3;
  t.eps = eps;
  t.beta = beta;
  return t;
}

Outcome score_unbiased() {
  double worst = 0.0;
  std::size_t instances = 0;
  const std::array<std::pair<std::size_t, std::size_t>, 4> shapes{{{1, 3}, {2, 2}, {2, 3}, {1, 6}}};
  for (auto [k, steps] : shapes) {
    for (double eps : {0.0, 0.1, 0.3}) {
      const Tiny t = make_tiny(100 + 10 * k + steps, k, steps, eps, 0.1);
      const auto x = pack(t.enc);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> y) {
            EncoderParams p = t.enc;
            unpack(p, y);
            return t.expected_loss(p);
          },
          x, 1e-5);
      const auto exact = t.expected_estimator();
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(exact[i] - fd[i]));
      ++instances;
    }
  }

  // Monte Carlo: the estimator as the trainer draws it.
  const Tiny t = make_tiny(7, 2, 3, 0.1, 0.1);
  const auto exact = t.expected_estimator();
  const std::size_t dim = exact.size();
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  EncoderState state(t.enc);
  SequenceTrace trace;
  EncoderGradAccumulator score(t.enc);
  SeededRng rng(7, 1);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    rollout_train(t.enc, t.frames, t.eps, rng, state, trace, &score);
    const auto tf = teacher_force(t.enc, as_inputs(t.frames), trace.received, t.eps);
    const auto g = pack(encoder_gradient(t.loss(trace.received, tf), score));
    for (std::size_t d = 0; d < dim; ++d) {
      sum[d] += g[d];
      sq[d] += g[d] * g[d];
    }
  }
  double worst_z = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double mean = sum[d] / n;
    const double se = std::sqrt((sq[d] / n - mean * mean) / n);
    worst_z = std::max(worst_z, std::abs(mean - exact[d]) / se);
  }
  return {worst <= 1e-6 && worst_z <= 3.0,
          "exact vs FD max abs err " + fmt("%.2e", worst) + " on " + std::to_string(instances) +
              " instances; MC max |z| " + fmt("%.2f", worst_z) + " over " + std::to_string(dim) + " params"};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome sequence_score() {
  double worst = 0.0;
  std::size_t bad = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SeededRng rng(400 + seed, 0);
    const std::size_t k = 1 + seed % 2, n_in = 1 + seed % 3, steps = 1 + seed % 4;
    const EncoderParams p = tiny_params(k, n_in, 3, 2, rng);
    const InputSeq inputs = random_inputs(steps, n_in, rng);
    SpikeTrain z(steps, k);
    for (auto& b : z.bits) b = rng.bernoulli(0.5) ? 1 : 0;
    const double eps = std::array<double, 4>{0.0, 0.1, 0.25, 0.4}[seed % 4];
    const auto got = pack(teacher_force(p, inputs, z, eps).score);
    const auto fd = finite_diff_grad(
        [&](std::span<const double> y) {
          EncoderParams q = p;
          unpack(q, y);
          return teacher_force(q, inputs, z, eps).log_lik;
        },
        pack(p), 1e-5);
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double err = std::abs(got[i] - fd[i]);
      if (std::abs(fd[i]) > 1e-9) worst = std::max(worst, err / std::abs(fd[i]));
      if (!close_rel(got[i], fd[i], 1e-5, 1e-10)) ++bad;
    }
  }
  return {bad == 0, "max rel err " + fmt("%.2e", worst) + " over 40 instances"};
}

// ---- criterion 5 -----------------------------------------------------------

Outcome channel_statistics() {
  SeededRng rng(5, 0);
  std::string detail;
  bool pass = true;
  for (double eps : {0.1, 0.25}) {
    const std::vector<std::uint8_t> bits(1000, 0);
    std::size_t flips = 0;
    for (int i = 0; i < 1000; ++i) {
      for (auto b : transmit(bits, eps, rng)) flips += b;
    }
    const double n = 1e6, sigma = std::sqrt(eps * (1 - eps) / n);
    const double dev = std::abs(flips / n - eps) / sigma;
    pass = pass && dev <= 3.0;
    detail += "flip rate at eps " + fmt("%.2f", eps) + " off by " + fmt("%.2f", dev) + " sigma; ";
  }
  for (std::size_t k : {2, 3}) {
    std::vector<double> u(k);
    for (std::size_t i = 0; i < k; ++i) u[i] = -1.0 + 1.2 * static_cast<double>(i);
    const double eps = 0.2;
    const std::size_t cells = std::size_t{1} << k;
    std::vector<double> expected(cells, 1.0), direct(cells, 0.0), staged(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      for (std::size_t i = 0; i < k; ++i) {
        // explicit two-stage law: sum over z of Bern(z) * P(flip or not)
        const double p = sigmoid(u[i]);
        const double on = p * (1 - eps) + (1 - p) * eps;
        expected[c] *= ((c >> i) & 1) ? on : 1 - on;
      }
    }
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      std::size_t a = 0, b = 0;
      const auto x = sample_noisy(u, eps, rng);
      const auto y = transmit(sample_spikes(u, rng), eps, rng);
      for (std::size_t j = 0; j < k; ++j) {
        a |= std::size_t{x[j]} << j;
        b |= std::size_t{y[j]} << j;
      }
      direct[a] += 1;
      staged[b] += 1;
    }
    double fit = 0.0, homog = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      fit += std::pow(direct[c] - n * expected[c], 2) / (n * expected[c]);
      const double pooled = (direct[c] + staged[c]) / 2.0;
      homog += 2.0 * std::pow(direct[c] - pooled, 2) / pooled;
    }
    const double crit = chi2_crit_99(cells - 1);
    pass = pass && fit < crit && homog < crit;
    detail += "k=" + std::to_string(k) + " chi2 " + fmt("%.2f", fit) + "/" + fmt("%.2f", homog) + " < " +
              fmt("%.2f", crit) + (k == 2 ? "; " : "");
  }
  return {pass, detail};
}

// ---- criterion 6 -----------------------------------------------------------

Outcome kl_nonnegative() {
  double smallest = INFINITY;
  std::size_t instances = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SeededRng rng(600 + seed, 0);
    const std::size_t k = 1 + seed % 2, steps = 1 + seed % 3, n_in = 1 + seed % 3;
    const EncoderParams p = tiny_params(k, n_in, 3, 2, rng);
    const InputSeq inputs = random_inputs(steps, n_in, rng);
    const double eps = uniform_in(rng, 0.0, 0.45);
    const PriorModel prior{uniform_in(rng, 0.05, 0.95)};
    double e = 0.0;
    for (const auto& z : all_trains(steps, k)) {
      const auto tf = teacher_force(p, inputs, z, eps);
      e += std::exp(tf.log_lik) * regularizer(z, tf.u, eps, prior);
    }
    smallest = std::min(smallest, e);
    ++instances;
  }
  return {smallest >= -1e-12, "min E[l_phi] = " + fmt("%.3e", smallest) + " over " + std::to_string(instances) +
                                  " instances"};
}

// ---- criteria 7-10 ---------------------------------------------------------

RunConfig default_run(std::uint64_t seed) {
  RunConfig c;
  c.train.seed = seed;
  c.validate();
  return c;
}

const RowSink kDiscard = [](const MetricsRow&) {};

// Seed 1's trained model is reused by the sweep below.
struct Shared {
  RunConfig config;
  ExperimentData data;
  Model model;
  bool ready = false;
} g_seed1;

Outcome toy_convergence() {
  std::size_t converged = 0, decreasing = 0;
  std::vector<double> first_hit, finals;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RunConfig c = default_run(seed);
    const ExperimentData data = load_data(c);
    Model model = init_model([&] {
      ModelSpec s = c.model;
      s.n_in = data.n_in;
      return s;
    }(), seed);
    Trainer trainer(model, c.train);
    std::size_t hit = 0;  // first epoch at <= 10%, 0 if never
    std::vector<double> losses;
    EpochMetrics m;
    for (std::size_t e = 0; e < c.train.epochs; ++e) {
      m = trainer.train_epoch(data.train, data.test);
      if (hit == 0 && m.error_rate <= 0.10) hit = m.epoch;
      losses.push_back(m.mean_loss);
    }
    first_hit.push_back(static_cast<double>(hit));
    finals.push_back(m.error_rate);
    converged += hit != 0 ? 1 : 0;
    bool strict = true;
    for (std::size_t e = 1; e < 5; ++e) strict = strict && losses[e] < losses[e - 1];
    decreasing += strict ? 1 : 0;
    if (seed == 1) g_seed1 = {c, data, model, true};
  }
  return {converged >= 9, std::to_string(converged) + "/10 seeds reach <= 10% error, first at epoch " +
                              join(first_hit, "%.0f") + ", final error " + join(finals) +
                              "; training loss strictly falls over epochs 1-5 in " + std::to_string(decreasing) +
                              "/10"};
}

bool non_increasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[j] > v[i] + tol) return false;
    }
  }
  return true;
}

std::vector<double> errors_of(const std::vector<MetricsRow>& rows) {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.error_rate);
  return e;
}

Outcome snr_sweep() {
  if (!g_seed1.ready) return {false, "no trained model"};
  RunConfig c = g_seed1.config;
  c.ebn0_grid_db = {-INFINITY, -12.0, -10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0};
  const auto eval = errors_of(run_sweep_snr(c, g_seed1.data, &g_seed1.model, c.train.epochs, kDiscard));
  const double chance = 1.0 - 1.0 / static_cast<double>(c.model.classes);

  RunConfig per = g_seed1.config;
  per.train_per_point = true;  // default grid; eps = 0.5 cannot be trained on
  validate_for(per, Command::SweepSnr);
  const auto trained = errors_of(run_sweep_snr(per, g_seed1.data, nullptr, 0, kDiscard));

  const bool pass = non_increasing(eval, 0.03) && std::abs(eval[0] - chance) <= 0.05 && non_increasing(trained, 0.03);
  return {pass, "eval sweep -inf..2 dB: " + join(eval) + " (chance " + fmt("%.2f", chance) +
                    "); train-per-point -8..2 dB: " + join(trained)};
}

Outcome mismatch() {
  bool pass = true;
  std::string detail = "train -2 dB, test -4..0 dB, error per seed:";
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RunConfig c = default_run(seed);
    c.train_ebn0_db = -2.0;
    c.test_grid_db = {-4.0, -3.0, -2.0, -1.0, 0.0};
    validate_for(c, Command::Mismatch);
    const auto e = errors_of(run_mismatch(c, load_data(c), kDiscard));
    const double matched = e[2];
    for (double x : e) pass = pass && x - matched <= 0.05;
    detail += " [" + join(e) + "]";
  }
  return {pass, detail};
}

Outcome sparsity() {
  RunConfig c = default_run(1);
  validate_for(c, Command::SweepBeta);
  const auto rows = run_sweep_beta(c, load_data(c), kDiscard);
  const std::size_t epochs = c.train.epochs, tail = std::min<std::size_t>(5, epochs);
  std::vector<double> rate, err;
  for (std::size_t b = 0; b < c.beta_grid.size(); ++b) {
    double r = 0.0, e = 0.0;
    for (std::size_t i = (b + 1) * epochs - tail; i < (b + 1) * epochs; ++i) {
      r += rows[i].spike_rate;
      e += rows[i].error_rate;
    }
    rate.push_back(r / tail);
    err.push_back(e / tail);
  }
  bool pass = non_increasing(rate, 0.02);
  for (double e : err) pass = pass && e - err.front() <= 0.03;
  return {pass, "beta 1e-4..1e-1 spike rate " + join(rate, "%.4f") + ", error " + join(err)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "channel marginal", 1.0, channel_marginal},
      {2, "gradient closed forms", 10.0, gradient_closed_forms},
      {3, "score-function unbiasedness", 60.0, score_unbiased},
      {4, "sequence log-likelihood gradient", 0.0, sequence_score},
      {5, "channel statistics", 0.0, channel_statistics},
      {6, "KL non-negativity", 0.0, kl_nonnegative},
      {7, "toy convergence", 300.0, toy_convergence},
      {8, "SNR sweep shape", 0.0, snr_sweep},
      {9, "mismatch robustness", 0.0, mismatch},
      {10, "sparsity trade-off", 0.0, sparsity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && s > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.budget_s) + " s budget";
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %s: %s (%s; %.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
