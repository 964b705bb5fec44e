// SPDX-License-Identifier: Apache-2.0

#include "vdib/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vdib {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // log(sigmoid(x)) = -log1p(exp(-x)) for x >= 0, x - log1p(exp(x)) otherwise.
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double q_function(double x) {
  // erfc keeps full relative precision deep in the upper tail, where 1 - Phi(x)
  // would cancel catastrophically.
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) {
  if (!(linear > 0.0)) {
    throw DomainError("linear_to_db: value must be positive");
  }
  return 10.0 * std::log10(linear);
}

double ebn0_to_epsilon(double ebn0_linear) {
  if (std::isnan(ebn0_linear) || ebn0_linear < 0.0) {
    throw DomainError("ebn0_to_epsilon: Eb/N0 must be non-negative (linear scale)");
  }
  return q_function(2.0 * ebn0_linear);
}

double ebn0_to_epsilon_bpsk(double ebn0_linear) {
  if (std::isnan(ebn0_linear) || ebn0_linear < 0.0) {
    throw DomainError("ebn0_to_epsilon_bpsk: Eb/N0 must be non-negative (linear scale)");
  }
  return q_function(std::sqrt(2.0 * ebn0_linear));
}

Kernel Kernel::exponential(double tau, std::size_t window) {
  if (!(tau > 0.0) || window == 0) {
    throw DomainError("Kernel::exponential: tau must be positive and window >= 1");
  }
  Kernel k;
  k.coefficients.resize(window);
  for (std::size_t d = 0; d < window; ++d) {
    k.coefficients[d] = std::exp(-static_cast<double>(d) / tau);
  }
  return k;
}

void Kernel::validate() const {
  if (coefficients.empty()) {
    throw DomainError("kernel window must be >= 1");
  }
  for (double c : coefficients) {
    if (!std::isfinite(c)) {
      throw DomainError("kernel coefficients must be finite");
    }
  }
}

double causal_convolve(const Kernel& kernel, std::span<const std::uint8_t> history, long t) {
  if (t < 0) {
    throw DomainError("causal_convolve: t must be >= 0");
  }
  const long last = std::min<long>(static_cast<long>(kernel.window()) - 1, t);
  double acc = 0.0;
  for (long d = 0; d <= last; ++d) {
    const long idx = t - d;
    if (idx < static_cast<long>(history.size())) {
      acc += kernel.coefficients[static_cast<std::size_t>(d)] * static_cast<double>(history[static_cast<std::size_t>(idx)]);
    }
  }
  return acc;
}

std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) {
    throw DomainError("finite_diff_grad: step must be positive");
  }
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      std::ostringstream msg;
      msg << "finite_diff_grad: non-finite function value at coordinate " << i;
      throw OracleError(msg.str());
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace vdib
