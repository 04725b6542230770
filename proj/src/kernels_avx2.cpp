// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants of the kernel table. Elementwise kernels mirror the scalar
// reference operation-for-operation (mul, add, div, sqrt — no FMA) so their
// results are bitwise identical per lane; the reductions use FMA and four
// accumulators and are only required to agree to rounding.
#include "tad/kernels.hpp"

#include <immintrin.h>

namespace tad::kernels {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

double sum_avx2(const double* a, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i];
  return res;
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_avx2(double alpha, double* x, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

void mul_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void squash_avx2(const double* x, double* out, size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_add_pd(one, _mm256_mul_pd(v, v));
    _mm256_storeu_pd(out + i, _mm256_div_pd(v, _mm256_sqrt_pd(t)));
  }
  for (; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    out[i] = x[i] / __builtin_sqrt(t);
  }
}

void squash_grad_avx2(const double* x, double* out, size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_add_pd(one, _mm256_mul_pd(v, v));
    __m256d r = _mm256_sqrt_pd(t);
    _mm256_storeu_pd(out + i, _mm256_div_pd(one, _mm256_mul_pd(t, r)));
  }
  for (; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    double r = __builtin_sqrt(t);
    out[i] = 1.0 / (t * r);
  }
}

void sigmoid_avx2(const double* x, double* out, size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_add_pd(one, _mm256_mul_pd(v, v));
    __m256d q = _mm256_div_pd(v, _mm256_sqrt_pd(t));
    _mm256_storeu_pd(out + i, _mm256_add_pd(half, _mm256_mul_pd(half, q)));
  }
  for (; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    out[i] = 0.5 + 0.5 * (x[i] / __builtin_sqrt(t));
  }
}

void sigmoid_grad_avx2(const double* x, double* out, size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_add_pd(one, _mm256_mul_pd(v, v));
    __m256d r = _mm256_sqrt_pd(t);
    _mm256_storeu_pd(out + i, _mm256_div_pd(half, _mm256_mul_pd(t, r)));
  }
  for (; i < n; ++i) {
    double t = 1.0 + x[i] * x[i];
    double r = __builtin_sqrt(t);
    out[i] = 0.5 / (t * r);
  }
}

constexpr Ops kAvx2Ops = {
    dot_avx2,     sum_avx2,          axpy_avx2,    scale_avx2,
    mul_avx2,     squash_avx2,       squash_grad_avx2,
    sigmoid_avx2, sigmoid_grad_avx2,
};

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  return &kAvx2Ops;
}

}  // namespace tad::kernels
