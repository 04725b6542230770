// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tad/types.hpp"

namespace tad::swt {

enum class Polarity {
  DarkOnLight,  // dark strokes on a lighter background (rays march against the gradient)
  LightOnDark,
  Both,  // run both and merge per pixel by minimum width
};

struct SwtConfig {
  // thresholds on gradient magnitude normalized by the maximum possible
  // 3x3 Sobel response for [0,1] images (4*sqrt(2))
  double canny_low = 0.1;
  double canny_high = 0.3;
  Polarity polarity = Polarity::DarkOnLight;
  int max_ray_len = 0;  // pixels; <= 0 means image diagonal / 4
  double angle_tolerance = 0.52359877559829887308;  // pi/6

  void validate() const;
};

// Thin (non-maximum-suppressed, hysteresis-linked) edges with the unit
// gradient directions that the ray caster needs. grad_x/grad_y are full
// rasters but are only defined where edge != 0.
struct EdgeMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> edge;
  std::vector<double> grad_x;
  std::vector<double> grad_y;

  bool at(int x, int y) const { return edge[size_t(y) * width + x] != 0; }
  size_t count() const;
};

EdgeMask detect_edges(const GrayImage& image, const SwtConfig& cfg);

// Per-pixel most likely stroke width. For each edge pixel a ray is cast
// along the polarity-signed gradient; it is accepted when it terminates on
// an edge pixel whose gradient opposes the start gradient within
// angle_tolerance. Accepted rays write their rounded Euclidean length to
// every pixel they crossed (keeping the per-pixel minimum), then a second
// pass clamps each ray's pixels to the median width along that ray.
StrokeWidthMap stroke_width_transform(const GrayImage& image, const SwtConfig& cfg);

}  // namespace tad::swt
