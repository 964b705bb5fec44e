// SPDX-License-Identifier: Apache-2.0
//
// AArch64 variant. Advanced SIMD is mandatory on AArch64, so no runtime probe
// is needed once this file is compiled in.

#include <arm_neon.h>

#include "vdib/kernels.hpp"

namespace vdib::kernels {

namespace {

inline float64x2_t load_u8x2(const std::uint8_t* x) {
  const double pair[2] = {static_cast<double>(x[0]), static_cast<double>(x[1])};
  return vld1q_f64(pair);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double dot_u8_neon(const double* w, const std::uint8_t* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(w + i), load_u8x2(x + i));
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    sum += w[i] * static_cast<double>(x[i]);
  }
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void axpy_u8_neon(double alpha, const std::uint8_t* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, load_u8x2(x + i))));
  }
  for (; i < n; ++i) {
    y[i] += alpha * static_cast<double>(x[i]);
  }
}

constexpr KernelTable kNeon{"neon", dot_neon, dot_u8_neon, axpy_neon, axpy_u8_neon};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace vdib::kernels
