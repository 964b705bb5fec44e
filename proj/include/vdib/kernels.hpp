// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops used by the encoder, the decoder and the
// optimizer. Each kernel has a portable scalar reference; vector variants are
// selected once at runtime from the host CPU features.
//
// axpy and axpy_u8 perform one multiply and one add per element in the same
// order as the scalar loop (no fused multiply-add), so every variant is
// bit-identical to the reference. dot and dot_u8 reassociate the sum and
// agree with the reference to rounding.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vdib::kernels {

struct KernelTable {
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i w[i] * x[i] for 0/1 bytes x
  double (*dot_u8)(const double* w, const std::uint8_t* x, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[i] += alpha * x[i] for 0/1 bytes x
  void (*axpy_u8)(double alpha, const std::uint8_t* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();

/// Vector variants compiled into this build and supported by the host CPU.
std::vector<const KernelTable*> available_tables();

/// The table used by the library. Defaults to the widest supported variant;
/// the VDIB_KERNELS environment variable ("scalar", "avx2", "neon") overrides.
const KernelTable& active();

/// Selects a table by name; returns false if it is not available here.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double dot_u8(std::span<const double> w, std::span<const std::uint8_t> x) {
  return active().dot_u8(w.data(), x.data(), w.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}

inline void axpy_u8(double alpha, std::span<const std::uint8_t> x, std::span<double> y) {
  active().axpy_u8(alpha, x.data(), y.data(), y.size());
}

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace vdib::kernels
