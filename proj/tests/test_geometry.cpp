// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tad/geometry.hpp"
#include "tad/rng.hpp"

using namespace tad;
using namespace tad::geometry;

TEST_CASE("signed area is positive for clockwise-on-screen quads") {
  std::vector<Vec2> quad{{0, 0}, {10, 0}, {10, 5}, {0, 5}};
  CHECK(signed_area(quad) == doctest::Approx(50.0));
  std::reverse(quad.begin(), quad.end());
  CHECK(signed_area(quad) == doctest::Approx(-50.0));
}

TEST_CASE("point in polygon, boundary-inclusive") {
  std::vector<Vec2> quad{{0, 0}, {10, 0}, {10, 5}, {0, 5}};
  CHECK(point_in_polygon({5, 2.5}, quad));
  CHECK(point_in_polygon({0, 0}, quad));     // vertex
  CHECK(point_in_polygon({5, 0}, quad));     // edge
  CHECK(!point_in_polygon({10.5, 2}, quad));
  CHECK(!point_in_polygon({-0.1, 2}, quad));
}

TEST_CASE("convex hull strips interior points") {
  std::vector<Vec2> pts{{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {1, 3}, {3, 1}};
  auto hull = convex_hull(pts);
  CHECK(hull.size() == 4);
}

TEST_CASE("min-area rect of an axis-aligned point set is its bounding box") {
  std::vector<Vec2> pts{{1, 2}, {7, 2}, {7, 5}, {1, 5}, {3, 3}};
  auto rect = min_area_rect(pts);
  CHECK(std::abs(signed_area(std::span<const Vec2>(rect.data(), 4)) - 18.0) < 1e-9);
  // canonical start: smallest (y, x)
  CHECK(rect[0].x == doctest::Approx(1.0));
  CHECK(rect[0].y == doctest::Approx(2.0));
}

TEST_CASE("min-area rect covers rotated rectangles tightly") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    double cx = rng.uniform(-5, 5), cy = rng.uniform(-5, 5);
    double w = rng.uniform(2, 10), h = rng.uniform(1, 6);
    double a = rng.uniform(0, 3.14159);
    double ca = std::cos(a), sa = std::sin(a);
    std::vector<Vec2> pts;
    for (int i = 0; i < 40; ++i) {  // points inside the true rectangle
      double u = rng.uniform(-0.5, 0.5) * w;
      double v = rng.uniform(-0.5, 0.5) * h;
      pts.push_back({cx + ca * u - sa * v, cy + sa * u + ca * v});
    }
    for (double sx : {-0.5, 0.5})
      for (double sy : {-0.5, 0.5})
        pts.push_back({cx + ca * sx * w - sa * sy * h, cy + sa * sx * w + ca * sy * h});
    auto rect = min_area_rect(pts);
    double area = std::abs(signed_area(std::span<const Vec2>(rect.data(), 4)));
    // optimal is the true rectangle itself (its corners are in the set)
    CHECK(area <= w * h * (1.0 + 1e-9));
    // and every point must be inside the fitted rectangle
    std::array<Vec2, 4> r = rect;
    for (const Vec2& p : pts)
      CHECK(point_in_polygon(p, std::span<const Vec2>(r.data(), 4)));
  }
}

TEST_CASE("clip of half-overlapping unit squares has area one half") {
  std::vector<Vec2> a{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> b{{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
  auto inter = clip_convex(a, b);
  REQUIRE(inter.size() >= 3);
  CHECK(std::abs(signed_area(inter)) == doctest::Approx(0.5));
}

TEST_CASE("clip of disjoint polygons is empty") {
  std::vector<Vec2> a{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> b{{3, 3}, {4, 3}, {4, 4}, {3, 4}};
  CHECK(clip_convex(a, b).size() < 3);
}

TEST_CASE("quad helpers: area, convexity, orientation") {
  QuadBox q;
  q.v = {Vec2{0, 0}, Vec2{10, 0}, Vec2{10, 5}, Vec2{0, 5}};
  CHECK(q.area() == doctest::Approx(50.0));
  CHECK(q.convex());

  QuadBox bow;  // self-intersecting
  bow.v = {Vec2{0, 0}, Vec2{10, 0}, Vec2{0, 5}, Vec2{10, 5}};
  CHECK(!bow.convex());

  auto o = oriented(q);
  CHECK(signed_area(std::span<const Vec2>(o.data(), 4)) > 0.0);
  QuadBox r = q;
  std::swap(r.v[1], r.v[3]);
  auto o2 = oriented(r);
  CHECK(signed_area(std::span<const Vec2>(o2.data(), 4)) > 0.0);
}

TEST_CASE("raster types reject bad dimensions") {
  CHECK_THROWS_AS(GrayImage::from_data(2, 2, {0.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScoreMap::from_data(2, 2, {0.0, 0.5, 1.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(StrokeWidthMap::from_data(1, 2, {0.5, 3.0}), std::invalid_argument);
  CHECK_NOTHROW(StrokeWidthMap::from_data(1, 2, {-1.0, 2.0}));
}
