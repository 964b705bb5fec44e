// SPDX-License-Identifier: Apache-2.0
//
// Variational directed-information-bottleneck training of the encoder /
// decoder pair.
//
// Per sample the loss is
//
//   l_theta + beta * l_phi,   l_phi = log p_phi(zhat || x) - log q(zhat)
//
// with q an i.i.d. Bernoulli prior over received bits. The decoder gradient
// is ordinary backpropagation of l_theta; the encoder gradient is the
// score-function estimate (l_theta + beta * l_phi) * grad_phi log p_phi(zhat || x),
// one Monte Carlo sample per input, averaged over the batch.
//
// The neuron history is the received sequence zhat, so p_phi(zhat || x) is the
// exact product of per-step channel marginals. Training draws zhat_t from that
// marginal in one step; evaluation draws z_t, flips it through the channel and
// by default feeds back zhat_t, which is the same law realized in two stages.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vdib/channel.hpp"
#include "vdib/decoder.hpp"
#include "vdib/encoder.hpp"
#include "vdib/events.hpp"

namespace vdib {

struct PriorModel {
  double rate = 0.3;
};

enum class OptimizerKind { Sgd, Momentum, Adam };

/// Which bits the encoder sees as its own past at test time.
enum class EvalFeedback { Received, Clean };

EvalFeedback parse_eval_feedback(std::string_view name);
std::string_view to_string(EvalFeedback feedback);

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct TrainConfig {
  double beta = 1e-3;
  double eta = 0.05;
  /// Encoder learning rate is eta * encoder_eta_scale.
  double encoder_eta_scale = 0.1;
  std::size_t steps = 20;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
  ChannelConfig channel = ChannelConfig::from_epsilon(0.1);
  double prior_rate = 0.3;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
  /// Moving-average control variate for the score-function estimator.
  bool baseline = false;
  double baseline_decay = 0.9;
  std::size_t threads = 1;
  EvalFeedback eval_feedback = EvalFeedback::Received;

  void validate() const;
};

struct Model {
  EncoderParams encoder;
  DecoderParams decoder;
};

/// Frames and labels ready for the encoder.
struct Dataset {
  std::vector<FrameTensor> frames;
  std::vector<std::uint32_t> labels;
  std::size_t classes = 0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

Dataset make_dataset(std::span<const EventRecord> records, std::size_t steps, std::size_t classes);

/// sum_t [ log p(zhat_t | u_t) - sum_i log Bern(zhat_{i,t}; prior.rate) ].
double regularizer(const SpikeTrain& zhat, std::span<const double> u_seq, double epsilon, const PriorModel& prior);

double vdib_loss(double l_theta, double l_phi, double beta);

/// f * score: one sample's encoder gradient.
EncoderGradAccumulator encoder_gradient(double f, const EncoderGradAccumulator& score);

/// Total spikes / (k * T * number of trains).
double spike_rate(std::span<const SpikeTrain> trains);

/// params -= eta * grads, elementwise. Throws DivergenceError on non-finite grads.
void sgd_update(std::span<double> params, std::span<const double> grads, double eta);

/// Stateful optimizer over a fixed list of parameter blocks.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const TrainConfig& config, const std::vector<std::size_t>& block_sizes);
  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads,
            double eta);

 private:
  OptimizerKind kind_;
  double momentum_;
  double beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Everything produced by running the encoder over one sequence.
struct SequenceTrace {
  SpikeTrain clean;     // z (evaluation only)
  SpikeTrain received;  // zhat
  std::vector<double> potentials;  // T x k
};

/// Training-mode rollout: zhat_t ~ p(zhat_t | u_t) directly, zhat fed back.
/// If `score` is non-null it receives grad_phi log p_phi(zhat || x).
void rollout_train(const EncoderParams& params, const FrameTensor& frames, double epsilon, SeededRng& rng,
                   EncoderState& state, SequenceTrace& out, EncoderGradAccumulator* score);

/// Evaluation-mode rollout: z_t ~ Bern(sigmoid(u_t)), zhat_t = BSC(z_t); the
/// history is zhat or z depending on `feedback`.
void rollout_eval(const EncoderParams& params, const FrameTensor& frames, double epsilon, SeededRng& rng,
                  EncoderState& state, SequenceTrace& out, EvalFeedback feedback = EvalFeedback::Received);

/// log p_phi(zhat || x) of a fixed received sequence, zhat fed back.
double sequence_log_likelihood(const EncoderParams& params, const FrameTensor& frames, const SpikeTrain& zhat,
                               double epsilon);

/// Stream tag of test-time sampling; shared so that every evaluation of the
/// same model at the same epsilon sees the same draws.
inline constexpr std::uint64_t kEvalStreamTag = 0x4556414c;  // "EVAL"

struct EvalResult {
  double error_rate = 0.0;
  double spike_rate = 0.0;  // clean z
};

/// One stochastic pass per test sample; sample n uses stream (tag, n).
EvalResult evaluate(const Model& model, const Dataset& data, double epsilon, std::uint64_t seed, std::uint64_t tag,
                    EvalFeedback feedback = EvalFeedback::Received);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based count of completed epochs
  double mean_l_theta = 0.0;
  double mean_l_phi = 0.0;
  double mean_loss = 0.0;
  double train_error_rate = 0.0;
  double error_rate = 0.0;
  double spike_rate = 0.0;
};

class Trainer {
 public:
  Trainer(Model& model, TrainConfig config);

  /// One pass over `train` in a seeded random order, then evaluation on `test`.
  EpochMetrics train_epoch(const Dataset& train, const Dataset& test);

  std::size_t epochs_done() const { return epoch_; }
  const TrainConfig& config() const { return config_; }
  double epsilon() const { return epsilon_; }

 private:
  struct SampleWork;

  Model& model_;
  TrainConfig config_;
  double epsilon_;
  Optimizer encoder_opt_;
  Optimizer decoder_opt_;
  std::optional<double> baseline_;
  std::size_t epoch_ = 0;
};

/// Fresh model for the given geometry.
struct ModelSpec {
  std::size_t k = 16;
  std::size_t n_in = 512;
  std::size_t steps = 20;
  std::size_t hidden = 1024;
  std::size_t classes = 4;
  double tau_a = 5.0;
  std::size_t window_a = 10;
  double tau_b = 5.0;
  std::size_t window_b = 10;
  EncoderInit encoder_init;
  OutputActivation output = OutputActivation::Sigmoid;
};

Model init_model(const ModelSpec& spec, std::uint64_t seed);

}  // namespace vdib
