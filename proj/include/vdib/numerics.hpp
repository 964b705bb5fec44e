// SPDX-License-Identifier: Apache-2.0
//
// Scalar math shared by every module: logistic functions, the Gaussian tail,
// the Eb/N0 -> crossover mapping, causal FIR convolution and a central
// finite-difference gradient used as the test oracle.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdib/errors.hpp"

namespace vdib {

double sigmoid(double x);

/// log(sigmoid(x)) without cancellation; log_sigmoid(-x) is log(1 - sigmoid(x)).
double log_sigmoid(double x);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

/// Standard Gaussian tail probability P(N(0,1) > x).
double q_function(double x);

double db_to_linear(double db);
double linear_to_db(double linear);

/// Maps a linear Eb/N0 to a BSC crossover probability.
using EpsilonMapping = double (*)(double ebn0_linear);

/// Q(2 Eb/N0): the relation used throughout this toolkit by default.
double ebn0_to_epsilon(double ebn0_linear);

/// Q(sqrt(2 Eb/N0)): textbook coherent BPSK hard-decision error rate.
double ebn0_to_epsilon_bpsk(double ebn0_linear);

/// Finite causal filter; coefficients[d] weights the sample d steps in the past.
struct Kernel {
  std::vector<double> coefficients;

  std::size_t window() const { return coefficients.size(); }

  /// coefficients[d] = exp(-d / tau) for d in [0, window).
  static Kernel exponential(double tau, std::size_t window);

  /// Throws DomainError unless non-empty with finite coefficients.
  void validate() const;
};

/// sum_{d=0}^{min(W-1, t)} kernel[d] * history[t - d].
double causal_convolve(const Kernel& kernel, std::span<const std::uint8_t> history, long t);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for each coordinate.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double h);

}  // namespace vdib
