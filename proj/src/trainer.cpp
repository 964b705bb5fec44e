// SPDX-License-Identifier: Apache-2.0

#include "vdib/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "vdib/errors.hpp"
#include "vdib/kernels.hpp"

namespace vdib {

namespace {

// Stream tags; every random draw in training is addressed by (seed, tag, ...).
constexpr std::uint64_t kInitTag = 0x494e4954;     // "INIT"
constexpr std::uint64_t kShuffleTag = 0x53485546;  // "SHUF"
constexpr std::uint64_t kTrainTag = 0x5452414e;    // "TRAN"

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_frames(const EncoderParams& params, const FrameTensor& frames) {
  if (frames.step_size() != params.n_in) {
    throw std::invalid_argument("encoder input dimension " + std::to_string(params.n_in) +
                                " does not match frame size " + std::to_string(frames.step_size()));
  }
}

void prepare_trace(SequenceTrace& out, std::size_t steps, std::size_t k, bool clean) {
  if (out.received.steps != steps || out.received.k != k) out.received = SpikeTrain(steps, k);
  if (clean && (out.clean.steps != steps || out.clean.k != k)) out.clean = SpikeTrain(steps, k);
  out.potentials.resize(steps * k);
}

}  // namespace

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "momentum") return OptimizerKind::Momentum;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (sgd|momentum|adam)");
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::Adam: return "adam";
  }
  return "sgd";
}

EvalFeedback parse_eval_feedback(std::string_view name) {
  if (name == "received") return EvalFeedback::Received;
  if (name == "clean") return EvalFeedback::Clean;
  throw ConfigError("unknown eval_feedback '" + std::string(name) + "' (received|clean)");
}

std::string_view to_string(EvalFeedback feedback) {
  return feedback == EvalFeedback::Received ? "received" : "clean";
}

void TrainConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be > 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0");
  if (!(encoder_eta_scale >= 0.0)) throw ConfigError("encoder_eta_scale must be >= 0");
  if (steps < 1) throw ConfigError("T must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(prior_rate > 0.0 && prior_rate < 1.0)) throw ConfigError("prior_rate must lie in (0, 1)");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("baseline_decay must lie in [0, 1)");
  channel.crossover();
}

Dataset make_dataset(std::span<const EventRecord> records, std::size_t steps, std::size_t classes) {
  Dataset d;
  d.classes = classes;
  d.frames.reserve(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    const EventRecord& r = records[n];
    if (r.label >= classes) {
      throw ValidationError("record " + std::to_string(n) + ": label " + std::to_string(r.label) +
                            " >= classes " + std::to_string(classes));
    }
    if (n > 0 && (r.width != records[0].width || r.height != records[0].height)) {
      throw ValidationError("record " + std::to_string(n) + ": geometry differs from the first record");
    }
    d.frames.push_back(events_to_frames(r, static_cast<long>(steps)));
    d.labels.push_back(r.label);
  }
  return d;
}

double regularizer(const SpikeTrain& zhat, std::span<const double> u_seq, double epsilon, const PriorModel& prior) {
  if (u_seq.size() != zhat.steps * zhat.k) throw std::invalid_argument("regularizer: sequences not aligned");
  if (!(prior.rate > 0.0 && prior.rate < 1.0)) throw DomainError("regularizer: prior rate must lie in (0, 1)");
  const double log_on = std::log(prior.rate);
  const double log_off = std::log1p(-prior.rate);
  double total = 0.0;
  for (std::size_t t = 0; t < zhat.steps; ++t) {
    const auto row = zhat.row(t);
    double log_prior = 0.0;
    for (std::uint8_t bit : row) log_prior += bit ? log_on : log_off;
    total += log_prob_noisy(row, u_seq.subspan(t * zhat.k, zhat.k), epsilon) - log_prior;
  }
  return total;
}

double vdib_loss(double l_theta, double l_phi, double beta) {
  if (!(beta > 0.0)) throw DomainError("vdib_loss: beta must be > 0");
  return l_theta + beta * l_phi;
}

EncoderGradAccumulator encoder_gradient(double f, const EncoderGradAccumulator& score) {
  EncoderGradAccumulator g = score;
  g.scale(f);
  return g;
}

double spike_rate(std::span<const SpikeTrain> trains) {
  if (trains.empty()) throw DomainError("spike_rate: no sequences");
  std::size_t spikes = 0;
  std::size_t cells = 0;
  for (const SpikeTrain& z : trains) {
    spikes += static_cast<std::size_t>(std::count(z.bits.begin(), z.bits.end(), std::uint8_t{1}));
    cells += z.steps * z.k;
  }
  if (cells == 0) throw DomainError("spike_rate: empty sequences");
  return static_cast<double>(spikes) / static_cast<double>(cells);
}

void sgd_update(std::span<double> params, std::span<const double> grads, double eta) {
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_update: shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw DivergenceError("sgd_update: non-finite gradient");
  }
  kernels::axpy(-eta, grads, params);
}

Optimizer::Optimizer(OptimizerKind kind, const TrainConfig& config, const std::vector<std::size_t>& block_sizes)
    : kind_(kind),
      momentum_(config.momentum),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
  if (kind_ != OptimizerKind::Sgd) {
    for (std::size_t n : block_sizes) m_.emplace_back(n, 0.0);
  }
  if (kind_ == OptimizerKind::Adam) {
    for (std::size_t n : block_sizes) v_.emplace_back(n, 0.0);
  }
}

void Optimizer::step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads,
                     double eta) {
  if (params.size() != grads.size()) throw std::invalid_argument("Optimizer: block count mismatch");
  ++t_;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto p = params[b];
    const auto g = grads[b];
    switch (kind_) {
      case OptimizerKind::Sgd:
        sgd_update(p, g, eta);
        break;
      case OptimizerKind::Momentum: {
        auto& m = m_.at(b);
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (!std::isfinite(g[i])) throw DivergenceError("optimizer: non-finite gradient");
          m[i] = momentum_ * m[i] + g[i];
          p[i] -= eta * m[i];
        }
        break;
      }
      case OptimizerKind::Adam: {
        auto& m = m_.at(b);
        auto& v = v_.at(b);
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (!std::isfinite(g[i])) throw DivergenceError("optimizer: non-finite gradient");
          m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
          v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
          p[i] -= eta * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
        break;
      }
    }
  }
}

void rollout_train(const EncoderParams& params, const FrameTensor& frames, double epsilon, SeededRng& rng,
                   EncoderState& state, SequenceTrace& out, EncoderGradAccumulator* score) {
  check_frames(params, frames);
  const std::size_t steps = frames.steps();
  const std::size_t k = params.k;
  prepare_trace(out, steps, k, false);
  state.reset();
  if (score != nullptr) score->reset();
  for (std::size_t t = 0; t < steps; ++t) {
    state.begin_step(frames.step(t));
    const auto u = std::span<double>(out.potentials).subspan(t * k, k);
    membrane_potentials(params, state, u);
    const SpikeVector zhat = sample_noisy(u, epsilon, rng);
    std::copy(zhat.begin(), zhat.end(), out.received.row(t).begin());
    if (score != nullptr) accumulate_score(*score, zhat, u, state, epsilon);
    state.end_step(zhat);
  }
}

void rollout_eval(const EncoderParams& params, const FrameTensor& frames, double epsilon, SeededRng& rng,
                  EncoderState& state, SequenceTrace& out, EvalFeedback feedback) {
  check_frames(params, frames);
  const std::size_t steps = frames.steps();
  const std::size_t k = params.k;
  prepare_trace(out, steps, k, true);
  state.reset();
  for (std::size_t t = 0; t < steps; ++t) {
    state.begin_step(frames.step(t));
    const auto u = std::span<double>(out.potentials).subspan(t * k, k);
    membrane_potentials(params, state, u);
    const SpikeVector z = sample_spikes(u, rng);
    const SpikeVector zhat = transmit(z, epsilon, rng);
    std::copy(z.begin(), z.end(), out.clean.row(t).begin());
    std::copy(zhat.begin(), zhat.end(), out.received.row(t).begin());
    state.end_step(feedback == EvalFeedback::Received ? zhat : z);
  }
}

double sequence_log_likelihood(const EncoderParams& params, const FrameTensor& frames, const SpikeTrain& zhat,
                               double epsilon) {
  check_frames(params, frames);
  if (zhat.steps != frames.steps() || zhat.k != params.k) {
    throw std::invalid_argument("sequence_log_likelihood: spike train shape mismatch");
  }
  EncoderState state(params);
  std::vector<double> u(params.k);
  double total = 0.0;
  for (std::size_t t = 0; t < frames.steps(); ++t) {
    state.begin_step(frames.step(t));
    membrane_potentials(params, state, u);
    total += log_prob_noisy(zhat.row(t), u, epsilon);
    state.end_step(zhat.row(t));
  }
  return total;
}

EvalResult evaluate(const Model& model, const Dataset& data, double epsilon, std::uint64_t seed, std::uint64_t tag,
                    EvalFeedback feedback) {
  if (data.empty()) throw DomainError("evaluate: empty dataset");
  std::vector<std::uint8_t> correct(data.size(), 0);
  std::vector<std::size_t> spikes(data.size(), 0);
  // Sequential: one state and cache reused across samples.
  EncoderState state(model.encoder);
  SequenceTrace trace;
  ForwardCache cache;
  for (std::size_t n = 0; n < data.size(); ++n) {
    SeededRng rng(seed, stream_id({tag, n}));
    rollout_eval(model.encoder, data.frames[n], epsilon, rng, state, trace, feedback);
    forward(model.decoder, trace.received, cache);
    correct[n] = predict(cache.probs) == data.labels[n] ? 1 : 0;
    spikes[n] = static_cast<std::size_t>(std::count(trace.clean.bits.begin(), trace.clean.bits.end(), std::uint8_t{1}));
  }
  const double n = static_cast<double>(data.size());
  const double cells = n * static_cast<double>(model.encoder.k * data.frames.front().steps());
  EvalResult r;
  r.error_rate = 1.0 - static_cast<double>(std::accumulate(correct.begin(), correct.end(), std::size_t{0})) / n;
  r.spike_rate = static_cast<double>(std::accumulate(spikes.begin(), spikes.end(), std::size_t{0})) / cells;
  return r;
}

struct Trainer::SampleWork {
  explicit SampleWork(const Model& m) : state(m.encoder), score(m.encoder) {}
  EncoderState state;
  SequenceTrace trace;
  EncoderGradAccumulator score;
  ForwardCache cache;
  double l_theta = 0.0;
  double l_phi = 0.0;
  bool correct = false;
};

namespace {

std::vector<std::size_t> encoder_block_sizes(EncoderParams& p) {
  std::vector<std::size_t> sizes;
  for (auto b : p.blocks()) sizes.push_back(b.size());
  return sizes;
}

std::vector<std::size_t> decoder_block_sizes(DecoderParams& p) {
  std::vector<std::size_t> sizes;
  for (auto b : p.blocks()) sizes.push_back(b.size());
  return sizes;
}

template <typename Blocks>
std::vector<std::span<const double>> const_blocks(const Blocks& blocks) {
  return std::vector<std::span<const double>>(blocks.begin(), blocks.end());
}

}  // namespace

Trainer::Trainer(Model& model, TrainConfig config)
    : model_(model),
      config_((config.validate(), std::move(config))),
      epsilon_(config_.channel.crossover()),
      encoder_opt_(config_.optimizer, config_, encoder_block_sizes(model.encoder)),
      decoder_opt_(config_.optimizer, config_, decoder_block_sizes(model.decoder)) {
  model_.encoder.validate();
  model_.decoder.validate();
  if (model_.decoder.in_dim != model_.encoder.k * config_.steps) {
    throw ConfigError("decoder input " + std::to_string(model_.decoder.in_dim) + " != k * T = " +
                      std::to_string(model_.encoder.k * config_.steps));
  }
}

EpochMetrics Trainer::train_epoch(const Dataset& train, const Dataset& test) {
  if (train.empty()) throw DomainError("train_epoch: empty training set");
  if (epsilon_ >= 0.5) {
    throw DomainError("train_epoch: epsilon = 0.5 makes the encoder score undefined");
  }
  const std::size_t n = train.size();
  const PriorModel prior{config_.prior_rate};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng shuffle(config_.seed, stream_id({kShuffleTag, epoch_}));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[shuffle.below(i)]);
  }

  const std::size_t batch = std::min(config_.batch_size, n);
  std::vector<SampleWork> work;
  work.reserve(batch);
  for (std::size_t j = 0; j < batch; ++j) work.emplace_back(model_);

  EncoderGradAccumulator enc_grad(model_.encoder);
  DecoderGrad dec_grad(model_.decoder);

  double sum_theta = 0.0;
  double sum_phi = 0.0;
  std::size_t train_correct = 0;

  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t count = std::min(batch, n - start);
    parallel_for(count, config_.threads, [&](std::size_t j) {
      SampleWork& w = work[j];
      const std::size_t idx = order[start + j];
      SeededRng rng(config_.seed, stream_id({kTrainTag, epoch_, start + j}));
      rollout_train(model_.encoder, train.frames[idx], epsilon_, rng, w.state, w.trace, &w.score);
      forward(model_.decoder, w.trace.received, w.cache);
      w.l_theta = classification_loss(w.cache, train.labels[idx], model_.decoder.output);
      w.l_phi = regularizer(w.trace.received, w.trace.potentials, epsilon_, prior);
      w.correct = predict(w.cache.probs) == train.labels[idx];
    });

    // Fixed sample order so the result does not depend on the thread count.
    enc_grad.reset();
    dec_grad.reset();
    const double inv = 1.0 / static_cast<double>(count);
    double batch_f = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const SampleWork& w = work[j];
      const double f = vdib_loss(w.l_theta, w.l_phi, config_.beta);
      if (!std::isfinite(f)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch_) + " (l_theta=" +
                              std::to_string(w.l_theta) + ", l_phi=" + std::to_string(w.l_phi) + ")");
      }
      const double centred = baseline_ ? f - *baseline_ : f;
      enc_grad.add_scaled(w.score, centred * inv);
      accumulate_backward(model_.decoder, w.cache, train.labels[order[start + j]], inv, dec_grad);
      batch_f += f;
      sum_theta += w.l_theta;
      sum_phi += w.l_phi;
      train_correct += w.correct ? 1 : 0;
    }
    if (config_.baseline) {
      const double mean_f = batch_f * inv;
      baseline_ = baseline_ ? config_.baseline_decay * *baseline_ + (1.0 - config_.baseline_decay) * mean_f : mean_f;
    }

    if (config_.clip_norm > 0.0) {
      double sq = 0.0;
      for (auto b : enc_grad.blocks()) sq += kernels::dot(b, b);
      for (auto b : dec_grad.blocks()) sq += kernels::dot(b, b);
      const double norm = std::sqrt(sq);
      if (norm > config_.clip_norm) {
        const double s = config_.clip_norm / norm;
        enc_grad.scale(s);
        for (auto b : dec_grad.blocks()) {
          for (double& v : b) v *= s;
        }
      }
    }

    encoder_opt_.step(model_.encoder.blocks(), const_blocks(enc_grad.blocks()), config_.eta * config_.encoder_eta_scale);
    decoder_opt_.step(model_.decoder.blocks(), const_blocks(dec_grad.blocks()), config_.eta);
    ++model_.decoder.version;
  }

  EpochMetrics m;
  m.epoch = epoch_ + 1;  // epochs completed
  m.mean_l_theta = sum_theta / static_cast<double>(n);
  m.mean_l_phi = sum_phi / static_cast<double>(n);
  m.mean_loss = m.mean_l_theta + config_.beta * m.mean_l_phi;
  m.train_error_rate = 1.0 - static_cast<double>(train_correct) / static_cast<double>(n);
  ++epoch_;
  if (!test.empty()) {
    const EvalResult r = evaluate(model_, test, epsilon_, config_.seed, kEvalStreamTag, config_.eval_feedback);
    m.error_rate = r.error_rate;
    m.spike_rate = r.spike_rate;
  }
  return m;
}

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
  Model m;
  SeededRng enc_rng(seed, stream_id({kInitTag, 0}));
  SeededRng dec_rng(seed, stream_id({kInitTag, 1}));
  m.encoder = init_encoder(spec.k, spec.n_in, Kernel::exponential(spec.tau_a, spec.window_a),
                           Kernel::exponential(spec.tau_b, spec.window_b), enc_rng, spec.encoder_init);
  m.decoder = init_decoder(spec.k * spec.steps, spec.hidden, spec.classes, dec_rng, spec.output);
  return m;
}

}  // namespace vdib
