// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tad/types.hpp"

namespace tad::eval {

// Intersection over union of two quads. Convex quads go through exact
// polygon clipping; non-convex input falls back to rasterized IoU at 1 px.
// Zero-area input is an error.
double quad_iou(const QuadBox& a, const QuadBox& b);

struct ImageBoxes {
  std::string image_id;
  std::vector<QuadBox> boxes;
};

// Greedy one-to-one matching in descending prediction confidence at the
// given IoU threshold. Predictions matching an ignored ground-truth box
// are discarded from both numerator and denominator; ignored boxes are
// never counted as matched or missed. Duplicate image ids are an error.
DetectionMetrics evaluate(const std::vector<ImageBoxes>& preds,
                          const std::vector<ImageBoxes>& gts, double iou_threshold = 0.5);

// Counts behind the metrics, exposed for reports.
struct MatchCounts {
  size_t true_positives = 0;
  size_t counted_predictions = 0;  // predictions not absorbed by ignored regions
  size_t relevant_gts = 0;         // non-ignored ground-truth boxes
};

MatchCounts match_counts(const std::vector<ImageBoxes>& preds,
                         const std::vector<ImageBoxes>& gts, double iou_threshold = 0.5);

}  // namespace tad::eval
