// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tad {

// Deterministic splitmix64 generator. All randomness in the project goes
// through this type so that fixed seeds give byte-identical artifacts;
// std::* distributions are implementation-defined and therefore avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    return lo + int(next() % uint64_t(hi - lo + 1));
  }

  bool coin(double p_true = 0.5) { return uniform01() < p_true; }

  double normal(double mu = 0.0, double sigma = 1.0) {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  uint64_t state_;
};

// Stream derivation: independent substreams from one user-facing seed.
inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
  Rng r(base ^ (0x632be59bd9b4e019ull + salt * 0x9e3779b97f4a7c15ull));
  return r.next();
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (char c : tag) {
    h ^= uint64_t(uint8_t(c));
    h *= 0x100000001b3ull;
  }
  return derive_seed(base, h);
}

}  // namespace tad
