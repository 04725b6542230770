// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "tad/geometry.hpp"

namespace tad::eval {

namespace {

double rasterized_iou(const QuadBox& a, const QuadBox& b) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec2& p : a.v) {
    xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
  }
  for (const Vec2& p : b.v) {
    xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
  }
  std::span<const Vec2> pa(a.v.data(), 4), pb(b.v.data(), 4);
  size_t in_a = 0, in_b = 0, in_both = 0;
  for (int y = int(std::floor(ymin)); y <= int(std::ceil(ymax)); ++y) {
    for (int x = int(std::floor(xmin)); x <= int(std::ceil(xmax)); ++x) {
      Vec2 c{x + 0.5, y + 0.5};
      bool ia = geometry::point_in_polygon(c, pa);
      bool ib = geometry::point_in_polygon(c, pb);
      in_a += ia;
      in_b += ib;
      in_both += (ia && ib);
    }
  }
  size_t uni = in_a + in_b - in_both;
  return uni == 0 ? 0.0 : double(in_both) / double(uni);
}

}  // namespace

double quad_iou(const QuadBox& a, const QuadBox& b) {
  double area_a = a.area(), area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0)
    throw std::invalid_argument("quad_iou: zero-area quad");

  if (!a.convex() || !b.convex()) return rasterized_iou(a, b);

  std::array<Vec2, 4> pa = geometry::oriented(a);
  std::array<Vec2, 4> pb = geometry::oriented(b);
  std::vector<Vec2> inter = geometry::clip_convex(
      std::span<const Vec2>(pa.data(), 4), std::span<const Vec2>(pb.data(), 4));
  double area_i = inter.size() >= 3
                      ? std::abs(geometry::signed_area(inter))
                      : 0.0;
  double area_u = area_a + area_b - area_i;
  return area_u <= 0.0 ? 0.0 : area_i / area_u;
}

namespace {

struct PredRef {
  size_t image = 0;
  size_t index = 0;
  double confidence = 1.0;
};

}  // namespace

MatchCounts match_counts(const std::vector<ImageBoxes>& preds,
                         const std::vector<ImageBoxes>& gts, double iou_threshold) {
  std::map<std::string, size_t> gt_by_id;
  for (size_t i = 0; i < gts.size(); ++i) {
    if (!gt_by_id.emplace(gts[i].image_id, i).second)
      throw std::invalid_argument("evaluate: duplicate ground-truth image id '" +
                                  gts[i].image_id + "'");
  }
  {
    std::set<std::string> seen;
    for (const ImageBoxes& p : preds)
      if (!seen.insert(p.image_id).second)
        throw std::invalid_argument("evaluate: duplicate prediction image id '" +
                                    p.image_id + "'");
  }

  MatchCounts counts;
  for (const ImageBoxes& g : gts)
    for (const QuadBox& b : g.boxes)
      if (!b.ignore) ++counts.relevant_gts;

  // predictions across all images, highest confidence first, stable
  std::vector<PredRef> order;
  for (size_t i = 0; i < preds.size(); ++i)
    for (size_t j = 0; j < preds[i].boxes.size(); ++j)
      order.push_back({i, j, preds[i].boxes[j].confidence});
  std::stable_sort(order.begin(), order.end(),
                   [](const PredRef& a, const PredRef& b) { return a.confidence > b.confidence; });

  std::map<size_t, std::vector<uint8_t>> gt_used;  // gt image index -> matched flags
  for (const PredRef& ref : order) {
    const ImageBoxes& pim = preds[ref.image];
    const QuadBox& pb = pim.boxes[ref.index];
    auto it = gt_by_id.find(pim.image_id);
    if (it == gt_by_id.end()) {
      ++counts.counted_predictions;  // no ground truth for this image: plain FP
      continue;
    }
    const ImageBoxes& gim = gts[it->second];
    std::vector<uint8_t>& used = gt_used[it->second];
    used.resize(gim.boxes.size(), 0);

    double best_iou = 0.0;
    size_t best_k = size_t(-1);
    double best_ignored_iou = 0.0;
    for (size_t k = 0; k < gim.boxes.size(); ++k) {
      double iou = quad_iou(pb, gim.boxes[k]);
      if (gim.boxes[k].ignore) {
        best_ignored_iou = std::max(best_ignored_iou, iou);
      } else if (!used[k] && iou > best_iou) {
        best_iou = iou;
        best_k = k;
      }
    }
    if (best_iou >= iou_threshold) {
      used[best_k] = 1;
      ++counts.true_positives;
      ++counts.counted_predictions;
    } else if (best_ignored_iou >= iou_threshold) {
      // absorbed by a don't-care region: drop from both sides
    } else {
      ++counts.counted_predictions;
    }
  }
  return counts;
}

DetectionMetrics evaluate(const std::vector<ImageBoxes>& preds,
                          const std::vector<ImageBoxes>& gts, double iou_threshold) {
  MatchCounts c = match_counts(preds, gts, iou_threshold);
  double precision =
      c.counted_predictions ? double(c.true_positives) / double(c.counted_predictions) : 0.0;
  double recall = c.relevant_gts ? double(c.true_positives) / double(c.relevant_gts) : 0.0;
  return DetectionMetrics::from_pr(precision, recall);
}

}  // namespace tad::eval
