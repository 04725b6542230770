// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "tad/rng.hpp"
#include "tad/types.hpp"

namespace tadtest {

inline tad::ScoreMap random_scores(tad::Rng& rng, int w, int h, double lo = 0.05,
                                   double hi = 0.95) {
  tad::ScoreMap m(w, h);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline tad::ScoreMap random_binary(tad::Rng& rng, int w, int h, double p_one = 0.3) {
  tad::ScoreMap m(w, h);
  for (double& v : m.data) v = rng.coin(p_one) ? 1.0 : 0.0;
  return m;
}

inline tad::GrayImage random_image(tad::Rng& rng, int w, int h) {
  tad::GrayImage img(w, h);
  for (double& v : img.data) v = rng.uniform01();
  return img;
}

// ||a-b||_2 / max(||b||_2, tiny), for gradient comparisons
inline double rel_l2_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
}

inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace tadtest
