// SPDX-License-Identifier: Apache-2.0

#include "vdib/kernels.hpp"

namespace vdib::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double dot_u8_scalar(const double* w, const std::uint8_t* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += w[i] * static_cast<double>(x[i]);
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void axpy_u8_scalar(double alpha, const std::uint8_t* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * static_cast<double>(x[i]);
  }
}

constexpr KernelTable kScalar{"scalar", dot_scalar, dot_u8_scalar, axpy_scalar, axpy_u8_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace vdib::kernels
