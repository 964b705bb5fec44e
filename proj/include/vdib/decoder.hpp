// SPDX-License-Identifier: Apache-2.0
//
// Edge-side inference network: flatten the T x k received bits, one dense
// ReLU layer, one dense output layer with per-class sigmoid (or softmax).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vdib/rng.hpp"

namespace vdib {

/// Binary T x k spike raster, row t holds the k bits of step t.
struct SpikeTrain {
  std::size_t steps = 0;
  std::size_t k = 0;
  std::vector<std::uint8_t> bits;

  SpikeTrain() = default;
  SpikeTrain(std::size_t steps_, std::size_t k_) : steps(steps_), k(k_), bits(steps_ * k_, 0) {}

  std::span<std::uint8_t> row(std::size_t t) { return std::span<std::uint8_t>(bits).subspan(t * k, k); }
  std::span<const std::uint8_t> row(std::size_t t) const {
    return std::span<const std::uint8_t>(bits).subspan(t * k, k);
  }
};

/// What the receiver has collected over a full sequence.
using ReceiveBuffer = SpikeTrain;

enum class OutputActivation { Sigmoid, Softmax };

OutputActivation parse_output_activation(std::string_view name);
std::string_view to_string(OutputActivation activation);

struct DecoderParams {
  std::size_t in_dim = 0;  // k * T
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::vector<double> w1;  // hidden x in_dim
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden
  std::vector<double> b2;  // classes
  OutputActivation output = OutputActivation::Sigmoid;
  /// Bumped on every parameter update so stale forward caches are detected.
  std::uint64_t version = 0;

  std::vector<std::span<double>> blocks();
  void validate() const;
};

/// Glorot-uniform weights, zero biases.
DecoderParams init_decoder(std::size_t in_dim, std::size_t hidden, std::size_t classes, SeededRng& rng,
                           OutputActivation output = OutputActivation::Sigmoid);

struct ForwardCache {
  std::vector<std::uint8_t> input;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;
  const DecoderParams* params = nullptr;
  std::uint64_t params_version = 0;
};

struct DecoderGrad {
  std::vector<double> w1, b1, w2, b2;

  DecoderGrad() = default;
  explicit DecoderGrad(const DecoderParams& params);
  void reset();
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
};

void forward(const DecoderParams& params, const ReceiveBuffer& buffer, ForwardCache& cache);
ForwardCache forward(const DecoderParams& params, const ReceiveBuffer& buffer);

/// One-hot binary cross-entropy over sigmoid outputs (categorical
/// cross-entropy for softmax outputs).
double classification_loss(std::span<const double> probs, std::size_t label,
                           OutputActivation output = OutputActivation::Sigmoid);

/// Same loss evaluated from the cached logits, free of log(0).
double classification_loss(const ForwardCache& cache, std::size_t label, OutputActivation output);

/// grad += scale * d loss / d params. Throws std::logic_error on a stale cache.
void accumulate_backward(const DecoderParams& params, const ForwardCache& cache, std::size_t label, double scale,
                         DecoderGrad& grad);
DecoderGrad backward(const DecoderParams& params, const ForwardCache& cache, std::size_t label);

/// argmax, lowest index on ties.
std::size_t predict(std::span<const double> probs);

}  // namespace vdib
