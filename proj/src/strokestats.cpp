// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/strokestats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "tad/geometry.hpp"

namespace tad::strokestats {

void TstConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("TstConfig: eta must be in (0,1]");
  if (!(eps1 >= 0.0)) throw std::invalid_argument("TstConfig: eps1 must be >= 0");
  if (!(eps2 >= 0.0)) throw std::invalid_argument("TstConfig: eps2 must be >= 0");
  if (!(score_threshold > 0.0 && score_threshold < 1.0))
    throw std::invalid_argument("TstConfig: score_threshold must be in (0,1)");
  if (!(sigma_sq_floor > 0.0))
    throw std::invalid_argument("TstConfig: sigma_sq_floor must be positive");
}

std::vector<double> collect_widths(const StrokeWidthMap& map, const QuadBox& box) {
  // clip the scan to the quad's bounding box
  double xmin = box.v[0].x, xmax = box.v[0].x, ymin = box.v[0].y, ymax = box.v[0].y;
  for (const Vec2& p : box.v) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  int x0 = std::max(0, int(std::floor(xmin - 0.5)));
  int x1 = std::min(map.width - 1, int(std::ceil(xmax)));
  int y0 = std::max(0, int(std::floor(ymin - 0.5)));
  int y1 = std::min(map.height - 1, int(std::ceil(ymax)));

  std::vector<double> widths;
  std::span<const Vec2> poly(box.v.data(), 4);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double w = map.at(x, y);
      if (w == StrokeWidthMap::kNoStroke) continue;
      if (geometry::point_in_polygon({x + 0.5, y + 0.5}, poly)) widths.push_back(w);
    }
  }
  return widths;
}

BoxStrokeStats stroke_stats(const std::vector<double>& widths, const TstConfig& cfg) {
  BoxStrokeStats s;
  s.n_samples = widths.size();
  if (widths.empty()) return s;

  double sum = 0.0;
  for (double w : widths) sum += w;
  s.mean = sum / double(widths.size());

  double sq = 0.0;
  for (double w : widths) sq += (w - s.mean) * (w - s.mean);
  s.sigma = std::sqrt(sq / double(widths.size()));

  // histogram mode over integer-rounded widths, ties toward the smaller width
  std::map<long, size_t> hist;
  for (double w : widths) ++hist[std::lround(w)];
  long best = 0;
  size_t best_count = 0;
  for (const auto& [width, count] : hist) {
    if (count > best_count) {  // map iterates ascending, so first max wins ties
      best = width;
      best_count = count;
    }
  }
  s.mode = double(best);
  s.sws = s.mode / std::max(s.sigma * s.sigma, cfg.sigma_sq_floor);
  return s;
}

FilterResult filter_boxes(const std::vector<QuadBox>& boxes, const StrokeWidthMap& map,
                          const TstConfig& cfg) {
  cfg.validate();
  FilterResult result;
  result.stats.reserve(boxes.size());
  for (size_t i = 0; i < boxes.size(); ++i) {
    std::vector<double> widths = collect_widths(map, boxes[i]);
    BoxStrokeStats s = stroke_stats(widths, cfg);
    if (s.n_samples < size_t(cfg.min_stroke_pixels)) {
      // no stroke evidence is not confident rejection
      s.low_evidence = true;
      result.stats.push_back(s);
      result.kept.push_back(boxes[i]);
      result.kept_indices.push_back(i);
      continue;
    }
    result.stats.push_back(s);
    if (s.sigma > cfg.eps1) {
      result.rejected.push_back({boxes[i], i, RejectReason::Sigma});
    } else if (s.sws < cfg.eps2) {
      result.rejected.push_back({boxes[i], i, RejectReason::Sws});
    } else {
      result.kept.push_back(boxes[i]);
      result.kept_indices.push_back(i);
    }
  }
  return result;
}

std::string rejection_report(const FilterResult& result) {
  std::string out = "box_index,reason,sigma,sws,n_samples\n";
  char line[128];
  for (const RejectedBox& r : result.rejected) {
    const BoxStrokeStats& s = result.stats[r.input_index];
    std::snprintf(line, sizeof line, "%zu,%s,%.6g,%.6g,%zu\n", r.input_index,
                  r.reason == RejectReason::Sigma ? "SIGMA" : "SWS", s.sigma, s.sws,
                  s.n_samples);
    out += line;
  }
  return out;
}

}  // namespace tad::strokestats
