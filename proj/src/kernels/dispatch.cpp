// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "vdib/kernels.hpp"

namespace vdib::kernels {

namespace detail {
#if !defined(VDIB_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(VDIB_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool host_has_avx2() {
#if defined(VDIB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* find(std::string_view name) {
  for (const KernelTable* t : available_tables()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("VDIB_KERNELS")) {
    if (const KernelTable* t = find(env)) return t;
  }
  return available_tables().back();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables{&scalar_table()};
  if (const KernelTable* t = detail::avx2_table(); t != nullptr && host_has_avx2()) {
    tables.push_back(t);
  }
  if (const KernelTable* t = detail::neon_table(); t != nullptr) {
    tables.push_back(t);
  }
  return tables;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const KernelTable* t = find(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace vdib::kernels
