// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "tad/rng.hpp"
#include "tad/strokestats.hpp"

using namespace tad;
using namespace tad::strokestats;

namespace {

// independent convex-quad containment: all edge cross products on one side
bool convex_contains_oracle(const QuadBox& q, Vec2 p) {
  double ref = 0.0;
  for (int i = 0; i < 4; ++i) {
    Vec2 a = q.v[i], b = q.v[(i + 1) % 4];
    double c = cross(b - a, p - a);
    if (std::abs(c) < 1e-12) continue;  // boundary counts as inside
    if (ref == 0.0) ref = c;
    else if ((c > 0) != (ref > 0)) return false;
  }
  return true;
}

QuadBox rotated_rect(Vec2 center, double w, double h, double angle) {
  QuadBox q;
  double ca = std::cos(angle), sa = std::sin(angle);
  int k = 0;
  for (auto [sx, sy] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}})
    q.v[k++] = {center.x + ca * sx * w - sa * sy * h, center.y + sa * sx * w + ca * sy * h};
  return q;
}

// slow direct statistics used as the oracle
BoxStrokeStats naive_stats(const std::vector<double>& widths, double sigma_floor_sq) {
  BoxStrokeStats s;
  s.n_samples = widths.size();
  if (widths.empty()) return s;
  long double mean = 0.0L;
  for (double w : widths) mean += w;
  mean /= (long double)widths.size();
  long double var = 0.0L;
  for (double w : widths) var += ((long double)w - mean) * ((long double)w - mean);
  var /= (long double)widths.size();
  std::map<long, size_t> hist;
  for (double w : widths) hist[std::lround(w)]++;
  long best = hist.begin()->first;
  size_t cnt = hist.begin()->second;
  for (auto& [k, c] : hist)
    if (c > cnt) {
      best = k;
      cnt = c;
    }
  s.mean = double(mean);
  s.sigma = double(sqrtl(var));
  s.mode = double(best);
  s.sws = s.mode / std::max(double(var), sigma_floor_sq);
  return s;
}

// paints per-box width lists into a map under unit-spaced rectangles
StrokeWidthMap map_with_box_widths(const std::vector<std::vector<double>>& per_box,
                                   std::vector<QuadBox>& boxes) {
  int w = int(per_box.size()) * 32 + 32;
  StrokeWidthMap map(w, 32);
  boxes.clear();
  for (size_t b = 0; b < per_box.size(); ++b) {
    int x0 = int(b) * 32 + 2;
    QuadBox q;
    q.v = {Vec2{double(x0), 2}, Vec2{double(x0 + 8), 2}, Vec2{double(x0 + 8), 10},
           Vec2{double(x0), 10}};
    boxes.push_back(q);
    for (size_t i = 0; i < per_box[b].size(); ++i)
      map.at(x0 + int(i % 8), 2 + int(i / 8)) = per_box[b][i];
  }
  return map;
}

}  // namespace

TEST_CASE("collect_widths: empty region and sentinel exclusion") {
  StrokeWidthMap map(8, 8);
  QuadBox q;
  q.v = {Vec2{0, 0}, Vec2{8, 0}, Vec2{8, 8}, Vec2{0, 8}};
  CHECK(collect_widths(map, q).empty());

  map.at(0, 0) = 3.0;
  map.at(1, 0) = 3.0;
  map.at(1, 1) = 5.0;  // (0,1) stays sentinel
  QuadBox q2;
  q2.v = {Vec2{0, 0}, Vec2{2, 0}, Vec2{2, 2}, Vec2{0, 2}};
  auto widths = collect_widths(map, q2);
  std::sort(widths.begin(), widths.end());
  CHECK(widths == std::vector<double>{3.0, 3.0, 5.0});
}

TEST_CASE("collect_widths on rotated quads matches a brute-force oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    StrokeWidthMap map(24, 24);
    for (double& v : map.data)
      if (rng.coin(0.6)) v = double(rng.uniform_int(1, 12));
    QuadBox q = rotated_rect({rng.uniform(6, 18), rng.uniform(6, 18)}, rng.uniform(4, 14),
                             rng.uniform(3, 10), rng.uniform(0, 3.14159));
    auto widths = collect_widths(map, q);

    std::vector<double> oracle;
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) {
        double v = map.at(x, y);
        if (v == StrokeWidthMap::kNoStroke) continue;
        if (convex_contains_oracle(q, {x + 0.5, y + 0.5})) oracle.push_back(v);
      }
    std::sort(widths.begin(), widths.end());
    std::sort(oracle.begin(), oracle.end());
    CHECK(widths == oracle);
  }
}

TEST_CASE("stroke_stats worked examples") {
  TstConfig cfg;

  auto s = stroke_stats({4, 4, 4, 4}, cfg);
  CHECK(s.mean == 4.0);
  CHECK(s.sigma == 0.0);
  CHECK(s.mode == 4.0);
  CHECK(s.sws == 4.0 / cfg.sigma_sq_floor);  // enormous: uniform strokes pass

  s = stroke_stats({3, 3, 3, 5}, cfg);
  CHECK(s.mean == doctest::Approx(3.5));
  CHECK(s.sigma == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(s.mode == 3.0);
  CHECK(s.sws == doctest::Approx(4.0).epsilon(1e-12));

  s = stroke_stats({2, 2, 10, 10}, cfg);
  CHECK(s.mean == doctest::Approx(6.0));
  CHECK(s.sigma == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.mode == 2.0);  // tie broken toward the smaller width
  CHECK(s.sws == doctest::Approx(0.125).epsilon(1e-12));

  s = stroke_stats({}, cfg);
  CHECK(s.n_samples == 0);
  CHECK(s.mean == 0.0);
  CHECK(s.sigma == 0.0);
  CHECK(s.mode == 0.0);
  CHECK(s.sws == 0.0);
}

TEST_CASE("stroke_stats agrees with the naive oracle on 1000 random multisets") {
  Rng rng(37);
  TstConfig cfg;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> widths(size_t(rng.uniform_int(1, 60)));
    for (double& w : widths) w = double(rng.uniform_int(1, 20));
    BoxStrokeStats got = stroke_stats(widths, cfg);
    BoxStrokeStats want = naive_stats(widths, cfg.sigma_sq_floor);
    CHECK(std::abs(got.mean - want.mean) <= 1e-9);
    CHECK(std::abs(got.sigma - want.sigma) <= 1e-9);
    CHECK(got.mode == want.mode);
    CHECK(std::abs(got.sws - want.sws) <= 1e-9 * std::max(1.0, std::abs(want.sws)));
  }
}

TEST_CASE("filter_boxes: sigma gate first, then stroke-width score") {
  TstConfig cfg;
  cfg.min_stroke_pixels = 4;
  std::vector<QuadBox> boxes;
  // box 0: {3,3,3,5} sigma ~0.866 <= 3, sws 4.0 >= 0.30 -> kept
  // box 1: {2,2,10,10} sigma 4 > 3 -> rejected SIGMA
  // box 2: wildly mixed widths -> rejected SIGMA
  // box 3: uniform 12s -> kept
  StrokeWidthMap map = map_with_box_widths(
      {{3, 3, 3, 5}, {2, 2, 10, 10}, {2, 9, 9, 2, 2, 12, 9, 2, 12, 2}, {12, 12, 12, 12, 12}},
      boxes);
  FilterResult r = filter_boxes(boxes, map, cfg);
  REQUIRE(r.stats.size() == 4);
  CHECK(r.kept_indices == std::vector<size_t>{0, 3});
  REQUIRE(r.rejected.size() == 2);
  CHECK(r.rejected[0].input_index == 1);
  CHECK(r.rejected[0].reason == RejectReason::Sigma);
  CHECK(r.rejected[1].reason == RejectReason::Sigma);

  // the two lists partition the input
  CHECK(r.kept.size() + r.rejected.size() == boxes.size());

  std::string report = rejection_report(r);
  CHECK(report.find("box_index,reason,sigma,sws,n_samples") == 0);
  CHECK(report.find("1,SIGMA,") != std::string::npos);
}

TEST_CASE("filter_boxes: sws gate rejects erratic low-mode boxes") {
  TstConfig cfg;
  cfg.min_stroke_pixels = 4;
  std::vector<QuadBox> boxes;
  // {2,2,6,6}: sigma 2 <= 3, mode 2, sws = 0.5 -> kept
  // {1,1,5,5}: sigma 2 <= 3, mode 1, sws = 0.25 < 0.3 -> rejected SWS
  StrokeWidthMap map = map_with_box_widths({{2, 2, 6, 6}, {1, 1, 5, 5}}, boxes);
  FilterResult r = filter_boxes(boxes, map, cfg);
  CHECK(r.kept_indices == std::vector<size_t>{0});
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].reason == RejectReason::Sws);
}

TEST_CASE("filter_boxes keeps low-evidence boxes and flags them") {
  TstConfig cfg;  // min_stroke_pixels = 10
  std::vector<QuadBox> boxes;
  StrokeWidthMap map = map_with_box_widths({{2, 2, 10, 10}}, boxes);  // would fail sigma
  FilterResult r = filter_boxes(boxes, map, cfg);
  CHECK(r.kept.size() == 1);
  CHECK(r.rejected.empty());
  CHECK(r.stats[0].low_evidence);
}

TEST_CASE("filter_boxes: empty input; uniform widths always kept") {
  TstConfig cfg;
  StrokeWidthMap map(8, 8);
  FilterResult r = filter_boxes({}, map, cfg);
  CHECK(r.kept.empty());
  CHECK(r.rejected.empty());
  CHECK(r.stats.empty());

  cfg.min_stroke_pixels = 1;
  std::vector<QuadBox> boxes;
  for (int w : {1, 4, 17}) {
    StrokeWidthMap m2 = map_with_box_widths({std::vector<double>(12, double(w))}, boxes);
    FilterResult u = filter_boxes(boxes, m2, cfg);
    CHECK(u.kept.size() == 1);  // sigma == 0 passes both gates for any mode
  }
}

TEST_CASE("sws is strictly decreasing in sigma for a fixed mode") {
  TstConfig cfg;
  double prev = 1e300;
  for (double outlier : {4.0, 6.0, 9.0, 14.0, 20.0}) {
    auto s = stroke_stats({3, 3, 3, outlier}, cfg);
    CHECK(s.mode == 3.0);
    CHECK(s.sws < prev);
    prev = s.sws;
  }
}

TEST_CASE("config validation") {
  TstConfig cfg;
  cfg.eta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TstConfig{};
  cfg.score_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TstConfig{};
  CHECK_NOTHROW(cfg.validate());
}
