// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tad/kernels.hpp"
#include "tad/rng.hpp"

using namespace tad;
using kernels::Ops;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// compensated (Kahan) long-accumulator oracle for the reductions
double dot_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0, c = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double y = a[i] * b[i] - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

const size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 33, 67, 1024, 4097};

}  // namespace

TEST_CASE("dispatch reports a valid level") {
  CHECK(kernels::level_name(kernels::active_level()) != nullptr);
  const Ops& o = kernels::ops();
  double x[2] = {1.0, 2.0};
  CHECK(o.sum(x, 2) == 3.0);
}

TEST_CASE("scalar reductions match a compensated oracle") {
  Rng rng(11);
  const Ops& s = kernels::scalar_ops();
  for (size_t n : kSizes) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double mag = 1.0;
    for (double v : a) mag += std::abs(v);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - dot_oracle(a, b)) <= 1e-12 * 3.0 * mag);
    std::vector<double> ones(n, 1.0);
    CHECK(std::abs(s.sum(a.data(), n) - dot_oracle(a, ones)) <= 1e-12 * 3.0 * mag);
  }
}

TEST_CASE("scalar squash and sigmoid derivatives match finite differences") {
  Rng rng(12);
  const Ops& s = kernels::scalar_ops();
  for (int trial = 0; trial < 200; ++trial) {
    double x = rng.uniform(-4, 4);
    double h = 1e-5;
    double xp = x + h, xm = x - h;
    double fp, fm, g, out;
    s.squash(&xp, &fp, 1);
    s.squash(&xm, &fm, 1);
    s.squash_grad(&x, &g, 1);
    CHECK(std::abs((fp - fm) / (2 * h) - g) < 1e-8);
    s.sigmoid(&xp, &fp, 1);
    s.sigmoid(&xm, &fm, 1);
    s.sigmoid_grad(&x, &g, 1);
    CHECK(std::abs((fp - fm) / (2 * h) - g) < 1e-8);
    s.sigmoid(&x, &out, 1);
    CHECK(out > 0.0);
    CHECK(out < 1.0);
  }
  double zero = 0.0, v;
  s.sigmoid(&zero, &v, 1);
  CHECK(v == 0.5);
  s.squash(&zero, &v, 1);
  CHECK(v == 0.0);
}

TEST_CASE("simd variants: elementwise kernels are bitwise equal to scalar") {
  const Ops* simd = kernels::avx2_ops();
  if (!simd) {
    MESSAGE("avx2 not available, skipping");
    return;
  }
  const Ops& s = kernels::scalar_ops();
  Rng rng(13);
  for (size_t n : kSizes) {
    auto x = random_vec(rng, n), y = random_vec(rng, n);
    std::vector<double> r1(n), r2(n);

    s.squash(x.data(), r1.data(), n);
    simd->squash(x.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.squash_grad(x.data(), r1.data(), n);
    simd->squash_grad(x.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.sigmoid(x.data(), r1.data(), n);
    simd->sigmoid(x.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.sigmoid_grad(x.data(), r1.data(), n);
    simd->sigmoid_grad(x.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.mul(x.data(), y.data(), r1.data(), n);
    simd->mul(x.data(), y.data(), r2.data(), n);
    CHECK(r1 == r2);

    double alpha = rng.uniform(-2, 2);
    r1 = y;
    r2 = y;
    s.axpy(alpha, x.data(), r1.data(), n);
    simd->axpy(alpha, x.data(), r2.data(), n);
    CHECK(r1 == r2);
    r1 = y;
    r2 = y;
    s.scale(alpha, r1.data(), n);
    simd->scale(alpha, r2.data(), n);
    CHECK(r1 == r2);
  }
}

TEST_CASE("simd variants: reductions agree with the oracle to rounding") {
  const Ops* simd = kernels::avx2_ops();
  if (!simd) {
    MESSAGE("avx2 not available, skipping");
    return;
  }
  Rng rng(14);
  for (size_t n : kSizes) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double mag = 1.0;
    for (size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    double oracle = dot_oracle(a, b);
    CHECK(std::abs(simd->dot(a.data(), b.data(), n) - oracle) <= 1e-12 * mag);
    std::vector<double> ones(n, 1.0);
    double sum_oracle = dot_oracle(a, ones);
    double mag_sum = 1.0;
    for (double v : a) mag_sum += std::abs(v);
    CHECK(std::abs(simd->sum(a.data(), n) - sum_oracle) <= 1e-12 * mag_sum);
  }
}

TEST_CASE("in-place mul aliasing (out == a) is supported") {
  const Ops& s = kernels::scalar_ops();
  Rng rng(15);
  for (size_t n : {5ul, 64ul}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    auto expect = a;
    for (size_t i = 0; i < n; ++i) expect[i] = a[i] * b[i];
    auto inplace = a;
    s.mul(inplace.data(), b.data(), inplace.data(), n);
    CHECK(inplace == expect);
    if (const Ops* simd = kernels::avx2_ops()) {
      inplace = a;
      simd->mul(inplace.data(), b.data(), inplace.data(), n);
      CHECK(inplace == expect);
    }
  }
}
