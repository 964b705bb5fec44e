// SPDX-License-Identifier: Apache-2.0

#include "vdib/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vdib/errors.hpp"
#include "vdib/kernels.hpp"
#include "vdib/numerics.hpp"

namespace vdib {

OutputActivation parse_output_activation(std::string_view name) {
  if (name == "sigmoid") return OutputActivation::Sigmoid;
  if (name == "softmax") return OutputActivation::Softmax;
  throw ConfigError("unknown decoder output '" + std::string(name) + "' (sigmoid|softmax)");
}

std::string_view to_string(OutputActivation activation) {
  return activation == OutputActivation::Sigmoid ? "sigmoid" : "softmax";
}

std::vector<std::span<double>> DecoderParams::blocks() {
  return {std::span<double>(w1), std::span<double>(b1), std::span<double>(w2), std::span<double>(b2)};
}

void DecoderParams::validate() const {
  if (in_dim == 0 || hidden == 0 || classes == 0) {
    throw std::invalid_argument("decoder: dimensions must be positive");
  }
  if (w1.size() != hidden * in_dim || b1.size() != hidden || w2.size() != classes * hidden ||
      b2.size() != classes) {
    throw std::invalid_argument("decoder: parameter shapes inconsistent");
  }
  for (const auto* v : {&w1, &b1, &w2, &b2}) {
    if (!std::all_of(v->begin(), v->end(), [](double x) { return std::isfinite(x); })) {
      throw std::invalid_argument("decoder: non-finite parameter");
    }
  }
}

DecoderParams init_decoder(std::size_t in_dim, std::size_t hidden, std::size_t classes, SeededRng& rng,
                           OutputActivation output) {
  DecoderParams p;
  p.in_dim = in_dim;
  p.hidden = hidden;
  p.classes = classes;
  p.output = output;
  auto glorot = [&rng](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w) x = (2.0 * rng.uniform() - 1.0) * r;
  };
  p.w1.resize(hidden * in_dim);
  p.w2.resize(classes * hidden);
  glorot(p.w1, in_dim, hidden);
  glorot(p.w2, hidden, classes);
  p.b1.assign(hidden, 0.0);
  p.b2.assign(classes, 0.0);
  p.validate();
  return p;
}

DecoderGrad::DecoderGrad(const DecoderParams& params)
    : w1(params.w1.size(), 0.0), b1(params.b1.size(), 0.0), w2(params.w2.size(), 0.0), b2(params.b2.size(), 0.0) {}

void DecoderGrad::reset() {
  for (auto block : blocks()) std::fill(block.begin(), block.end(), 0.0);
}

std::vector<std::span<double>> DecoderGrad::blocks() {
  return {std::span<double>(w1), std::span<double>(b1), std::span<double>(w2), std::span<double>(b2)};
}

std::vector<std::span<const double>> DecoderGrad::blocks() const {
  return {std::span<const double>(w1), std::span<const double>(b1), std::span<const double>(w2),
          std::span<const double>(b2)};
}

void forward(const DecoderParams& params, const ReceiveBuffer& buffer, ForwardCache& cache) {
  if (buffer.bits.size() != params.in_dim || buffer.steps * buffer.k != params.in_dim) {
    throw std::invalid_argument("decoder forward: buffer holds " + std::to_string(buffer.bits.size()) +
                                " bits, decoder expects " + std::to_string(params.in_dim));
  }
  cache.input.assign(buffer.bits.begin(), buffer.bits.end());
  cache.hidden_pre.resize(params.hidden);
  cache.hidden.resize(params.hidden);
  cache.logits.resize(params.classes);
  cache.probs.resize(params.classes);

  const std::span<const double> w1(params.w1);
  for (std::size_t r = 0; r < params.hidden; ++r) {
    const double pre = kernels::dot_u8(w1.subspan(r * params.in_dim, params.in_dim), cache.input) + params.b1[r];
    cache.hidden_pre[r] = pre;
    cache.hidden[r] = pre > 0.0 ? pre : 0.0;
  }
  const std::span<const double> w2(params.w2);
  for (std::size_t c = 0; c < params.classes; ++c) {
    cache.logits[c] = kernels::dot(w2.subspan(c * params.hidden, params.hidden), cache.hidden) + params.b2[c];
  }
  if (params.output == OutputActivation::Sigmoid) {
    for (std::size_t c = 0; c < params.classes; ++c) cache.probs[c] = sigmoid(cache.logits[c]);
  } else {
    const double top = *std::max_element(cache.logits.begin(), cache.logits.end());
    double total = 0.0;
    for (std::size_t c = 0; c < params.classes; ++c) {
      cache.probs[c] = std::exp(cache.logits[c] - top);
      total += cache.probs[c];
    }
    for (double& p : cache.probs) p /= total;
  }
  cache.params = &params;
  cache.params_version = params.version;
}

ForwardCache forward(const DecoderParams& params, const ReceiveBuffer& buffer) {
  ForwardCache cache;
  forward(params, buffer, cache);
  return cache;
}

double classification_loss(std::span<const double> probs, std::size_t label, OutputActivation output) {
  if (label >= probs.size()) throw std::out_of_range("classification_loss: label out of range");
  if (output == OutputActivation::Softmax) {
    return -std::log(probs[label]);
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    loss -= c == label ? std::log(probs[c]) : std::log1p(-probs[c]);
  }
  return loss;
}

double classification_loss(const ForwardCache& cache, std::size_t label, OutputActivation output) {
  const auto& z = cache.logits;
  if (label >= z.size()) throw std::out_of_range("classification_loss: label out of range");
  if (output == OutputActivation::Softmax) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - top);
    return top + std::log(total) - z[label];
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    loss -= c == label ? log_sigmoid(z[c]) : log_sigmoid(-z[c]);
  }
  return loss;
}

void accumulate_backward(const DecoderParams& params, const ForwardCache& cache, std::size_t label, double scale,
                         DecoderGrad& grad) {
  if (cache.params != &params || cache.params_version != params.version) {
    throw std::logic_error("decoder backward: cache does not belong to the current parameters");
  }
  if (label >= params.classes) throw std::out_of_range("decoder backward: label out of range");
  if (grad.w1.size() != params.w1.size() || grad.w2.size() != params.w2.size()) {
    throw std::invalid_argument("decoder backward: gradient shape mismatch");
  }
  // Both sigmoid+BCE and softmax+CE give d loss / d logit = p - onehot.
  std::vector<double> delta_out(params.classes);
  for (std::size_t c = 0; c < params.classes; ++c) {
    delta_out[c] = scale * (cache.probs[c] - (c == label ? 1.0 : 0.0));
  }
  std::vector<double> delta_hidden(params.hidden, 0.0);
  const std::span<const double> w2(params.w2);
  for (std::size_t c = 0; c < params.classes; ++c) {
    grad.b2[c] += delta_out[c];
    kernels::axpy(delta_out[c], cache.hidden, std::span<double>(grad.w2).subspan(c * params.hidden, params.hidden));
    kernels::axpy(delta_out[c], w2.subspan(c * params.hidden, params.hidden), delta_hidden);
  }
  for (std::size_t r = 0; r < params.hidden; ++r) {
    if (cache.hidden_pre[r] <= 0.0) continue;  // ReLU gate: dead units get exactly zero
    const double d = delta_hidden[r];
    grad.b1[r] += d;
    kernels::axpy_u8(d, cache.input, std::span<double>(grad.w1).subspan(r * params.in_dim, params.in_dim));
  }
}

DecoderGrad backward(const DecoderParams& params, const ForwardCache& cache, std::size_t label) {
  DecoderGrad grad(params);
  accumulate_backward(params, cache, label, 1.0, grad);
  return grad;
}

std::size_t predict(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("predict: empty probability vector");
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return best;
}

}  // namespace vdib
