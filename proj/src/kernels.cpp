// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace tad::kernels {

// ---- scalar reference ---------------------------------------------------------

namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_scalar(double alpha, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void mul_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void squash_scalar(const double* x, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    out[i] = x[i] / std::sqrt(t);
  }
}

void squash_grad_scalar(const double* x, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    double r = std::sqrt(t);
    out[i] = 1.0 / (t * r);
  }
}

void sigmoid_scalar(const double* x, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    out[i] = 0.5 + 0.5 * (x[i] / std::sqrt(t));
  }
}

void sigmoid_grad_scalar(const double* x, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    double r = std::sqrt(t);
    out[i] = 0.5 / (t * r);
  }
}

constexpr Ops kScalarOps = {
    dot_scalar,     sum_scalar,          axpy_scalar,    scale_scalar,
    mul_scalar,     squash_scalar,       squash_grad_scalar,
    sigmoid_scalar, sigmoid_grad_scalar,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

// ---- dispatch -------------------------------------------------------------------

namespace {

struct Dispatch {
  const Ops* table;
  Level level;

  Dispatch() {
    table = &kScalarOps;
    level = Level::Scalar;
    const char* env = std::getenv("TAD_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return;
    bool force_avx2 = env && std::strcmp(env, "avx2") == 0;
#if defined(TAD_BUILD_AVX2)
    if (force_avx2 || __builtin_cpu_supports("avx2")) {
      if (const Ops* avx = avx2_ops()) {
        table = avx;
        level = Level::Avx2;
      }
    }
#else
    (void)force_avx2;
#endif
  }
};

const Dispatch& dispatch() {
  static const Dispatch d;
  return d;
}

}  // namespace

const Ops& ops() { return *dispatch().table; }
Level active_level() { return dispatch().level; }

const char* level_name(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
  }
  return "?";
}

#if !defined(TAD_BUILD_AVX2)
const Ops* avx2_ops() { return nullptr; }
#endif

}  // namespace tad::kernels
