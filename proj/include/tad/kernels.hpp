// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace tad::kernels {

// Data-parallel inner loops used by training and the losses. One scalar
// reference implementation plus SIMD variants, selected once at runtime.
//
// Contract per kernel family:
//  * elementwise kernels (axpy, scale, mul, squash, sigmoid and their
//    derivative maps) use only +,-,*,/,sqrt in a fixed order, so every
//    variant produces bitwise-identical output;
//  * reductions (dot, sum) may reassociate and use FMA, so variants agree
//    to rounding only and are tested against a compensated oracle.
struct Ops {
  double (*dot)(const double* a, const double* b, size_t n);
  double (*sum)(const double* a, size_t n);
  void (*axpy)(double alpha, const double* x, double* y, size_t n);  // y += a*x
  void (*scale)(double alpha, double* x, size_t n);                  // x *= a
  void (*mul)(const double* a, const double* b, double* out, size_t n);
  // squash(x) = x / sqrt(1 + x^2), an odd smooth saturation to (-1,1).
  void (*squash)(const double* x, double* out, size_t n);
  // squash'(x) = (1 + x^2)^(-3/2)
  void (*squash_grad)(const double* x, double* out, size_t n);
  // sigmoid(x) = 0.5 * (1 + squash(x)), smooth, maps R -> (0,1), sigmoid(0)=0.5.
  void (*sigmoid)(const double* x, double* out, size_t n);
  // sigmoid'(x) = 0.5 * (1 + x^2)^(-3/2)
  void (*sigmoid_grad)(const double* x, double* out, size_t n);
};

enum class Level { Scalar = 0, Avx2 = 1 };

// Active table. Chosen once: TAD_SIMD env override ("scalar"/"avx2"),
// otherwise the best level the CPU supports.
const Ops& ops();
Level active_level();
const char* level_name(Level level);

// Direct access to the variants for equivalence tests.
const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or not supported

}  // namespace tad::kernels
