// SPDX-License-Identifier: Apache-2.0

#include "vdib/rng.hpp"

#include <cmath>

namespace vdib {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::exponential(double rate) {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform()) / rate;
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % n;
}

std::uint64_t stream_id(std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t tag : tags) {
    h = splitmix64(h ^ splitmix64(tag));
  }
  return h;
}

}  // namespace vdib
