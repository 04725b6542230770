// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tad/types.hpp"

namespace tad::strokestats {

// Pseudo-label generation knobs. Defaults are the working configuration:
// eta = 1/3 of candidate negatives kept, sigma upper threshold 3.0,
// stroke-width-score lower threshold 0.30.
struct TstConfig {
  double eta = 1.0 / 3.0;        // fraction of candidate negatives kept, (0,1]
  double eps1 = 3.0;             // reject boxes with stroke-width sigma above this
  double eps2 = 0.30;            // reject boxes with stroke-width score below this
  double score_threshold = 0.8;  // score-map binarization for box extraction
  double min_box_area = 16.0;    // px^2
  int min_stroke_pixels = 10;    // below this the filter has no evidence and keeps the box
  double sigma_sq_floor = 1e-6;  // variance floor so sigma=0 gives a huge, finite score

  void validate() const;
};

// Per-box stroke-width statistics. score = mode / max(sigma^2, floor):
// uniform strokes (sigma ~ 0) score huge, erratic ones score tiny.
struct BoxStrokeStats {
  size_t n_samples = 0;
  double mean = 0.0;
  double sigma = 0.0;     // population standard deviation (divisor N)
  double mode = 0.0;      // most common integer-rounded width, ties toward smaller
  double sws = 0.0;
  bool low_evidence = false;  // fewer than min_stroke_pixels samples; kept fail-open
};

enum class RejectReason { Sigma, Sws };

struct RejectedBox {
  QuadBox box;
  size_t input_index = 0;
  RejectReason reason = RejectReason::Sigma;
};

struct FilterResult {
  std::vector<QuadBox> kept;
  std::vector<size_t> kept_indices;            // into the input list
  std::vector<BoxStrokeStats> stats;           // parallel to the input list
  std::vector<RejectedBox> rejected;
};

// Widths of all non-sentinel pixels whose centers lie inside the quad
// (boundary inclusive). Empty result is fine.
std::vector<double> collect_widths(const StrokeWidthMap& map, const QuadBox& box);

BoxStrokeStats stroke_stats(const std::vector<double>& widths, const TstConfig& cfg);

// Sequential filter: sigma > eps1 rejects, then sws < eps2 rejects.
// Boxes with too few stroke pixels are kept and flagged. Order preserved;
// kept and rejected partition the input.
FilterResult filter_boxes(const std::vector<QuadBox>& boxes, const StrokeWidthMap& map,
                          const TstConfig& cfg);

// One line per rejected box: "box_index,reason,sigma,sws,n_samples".
std::string rejection_report(const FilterResult& result);

}  // namespace tad::strokestats
