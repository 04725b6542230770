// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/swt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace tad::swt {

namespace {

// Magnitude normalization: a full-contrast straight step edge through the
// binomial pre-smooth peaks at |g| = 3, i.e. 3*sqrt(2) across diagonals.
// Dividing by that keeps the threshold semantics of the unsmoothed Sobel
// (a step of contrast c has normalized magnitude ~0.71*c).
constexpr double kMaxSobelMag = 4.2426406871192851464050661726291;  // 3*sqrt(2)

inline double clamp_fetch(const GrayImage& img, int x, int y) {
  x = std::clamp(x, 0, img.width - 1);
  y = std::clamp(y, 0, img.height - 1);
  return img.at(x, y);
}

}  // namespace

void SwtConfig::validate() const {
  if (!(canny_low > 0.0) || !(canny_low < canny_high))
    throw std::invalid_argument("SwtConfig: need 0 < canny_low < canny_high");
  if (!(angle_tolerance > 0.0))
    throw std::invalid_argument("SwtConfig: angle_tolerance must be positive");
}

size_t EdgeMask::count() const {
  size_t n = 0;
  for (uint8_t e : edge) n += (e != 0);
  return n;
}

EdgeMask detect_edges(const GrayImage& image, const SwtConfig& cfg) {
  cfg.validate();
  const int w = image.width, h = image.height;
  const size_t n = image.npixels();

  // 3x3 binomial pre-smooth: rasterized oblique edges otherwise carry
  // staircase gradient noise that breaks the opposing-gradient test
  GrayImage smooth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      static constexpr double k[3] = {0.25, 0.5, 0.25};
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += k[dx + 1] * k[dy + 1] * clamp_fetch(image, x + dx, y + dy);
      smooth.at(x, y) = acc;
    }
  }

  std::vector<double> gx(n), gy(n), mag(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double tl = clamp_fetch(smooth, x - 1, y - 1), tc = clamp_fetch(smooth, x, y - 1),
             tr = clamp_fetch(smooth, x + 1, y - 1), ml = clamp_fetch(smooth, x - 1, y),
             mr = clamp_fetch(smooth, x + 1, y), bl = clamp_fetch(smooth, x - 1, y + 1),
             bc = clamp_fetch(smooth, x, y + 1), br = clamp_fetch(smooth, x + 1, y + 1);
      double sx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
      double sy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
      size_t i = size_t(y) * w + x;
      gx[i] = sx;
      gy[i] = sy;
      mag[i] = std::hypot(sx, sy) / kMaxSobelMag;
    }
  }

  // non-maximum suppression along the quantized gradient direction
  std::vector<uint8_t> thin(n, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = size_t(y) * w + x;
      double m = mag[i];
      if (m < cfg.canny_low) continue;
      double dxs = gx[i], dys = gy[i];
      int ox, oy;
      // quantize to one of 4 directions
      double ax = std::abs(dxs), ay = std::abs(dys);
      if (ax >= 2.414213562373095 * ay) {
        ox = 1; oy = 0;
      } else if (ay >= 2.414213562373095 * ax) {
        ox = 0; oy = 1;
      } else if ((dxs > 0) == (dys > 0)) {
        ox = 1; oy = 1;
      } else {
        ox = 1; oy = -1;
      }
      auto mag_at = [&](int xx, int yy) -> double {
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) return 0.0;
        return mag[size_t(yy) * w + xx];
      };
      if (m >= mag_at(x + ox, y + oy) && m > mag_at(x - ox, y - oy)) thin[i] = 1;
    }
  }

  // hysteresis: strong seeds spread to weak neighbours over thin pixels
  std::vector<uint8_t> edge(n, 0);
  std::deque<size_t> queue;
  for (size_t i = 0; i < n; ++i)
    if (thin[i] && mag[i] >= cfg.canny_high) {
      edge[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    size_t i = queue.front();
    queue.pop_front();
    int x = int(i % w), y = int(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        int xx = x + dx, yy = y + dy;
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
        size_t j = size_t(yy) * w + xx;
        if (thin[j] && !edge[j] && mag[j] >= cfg.canny_low) {
          edge[j] = 1;
          queue.push_back(j);
        }
      }
    }
  }

  EdgeMask mask;
  mask.width = w;
  mask.height = h;
  mask.edge = std::move(edge);
  mask.grad_x.assign(n, 0.0);
  mask.grad_y.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (!mask.edge[i]) continue;
    double m = std::hypot(gx[i], gy[i]);
    if (m <= 0.0) {  // cannot orient a ray from a flat pixel
      mask.edge[i] = 0;
      continue;
    }
    mask.grad_x[i] = gx[i] / m;
    mask.grad_y[i] = gy[i] / m;
  }
  return mask;
}

namespace {

struct Ray {
  std::vector<int> pixels;  // flat indices, start..end inclusive
  double width = 0.0;
};

void cast_rays(const GrayImage& image, const EdgeMask& edges, const SwtConfig& cfg,
               bool dark_on_light, std::vector<double>& swt, std::vector<Ray>& rays) {
  const int w = image.width, h = image.height;
  const double diag = std::hypot(double(w), double(h));
  const double max_len = cfg.max_ray_len > 0 ? double(cfg.max_ray_len) : diag / 4.0;
  const double cos_tol = std::cos(cfg.angle_tolerance);
  const double step = 0.2;

  std::vector<int> pixels;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      size_t i0 = size_t(y0) * w + x0;
      if (!edges.edge[i0]) continue;
      double gpx = edges.grad_x[i0], gpy = edges.grad_y[i0];
      // march into the stroke: against the gradient for dark-on-light
      double dx = dark_on_light ? -gpx : gpx;
      double dy = dark_on_light ? -gpy : gpy;

      pixels.clear();
      pixels.push_back(int(i0));
      double px = x0 + 0.5, py = y0 + 0.5;
      int cx = x0, cy = y0;
      double traveled = 0.0;
      while (traveled <= max_len) {
        px += step * dx;
        py += step * dy;
        traveled += step;
        int nx = int(std::floor(px)), ny = int(std::floor(py));
        if (nx == cx && ny == cy) continue;
        cx = nx;
        cy = ny;
        if (cx < 0 || cx >= w || cy < 0 || cy >= h) break;
        size_t j = size_t(cy) * w + cx;
        pixels.push_back(int(j));
        if (pixels.size() > 1 && edges.edge[j]) {
          // accept when the terminating gradient opposes the start gradient
          double gq_dot_neg_gp = -(edges.grad_x[j] * gpx + edges.grad_y[j] * gpy);
          if (gq_dot_neg_gp >= cos_tol) {
            double len = std::hypot(double(cx - x0), double(cy - y0));
            double width = std::max(1.0, std::round(len));
            for (int p : pixels)
              if (swt[p] < 0.0 || width < swt[p]) swt[p] = width;
            Ray r;
            r.pixels = pixels;
            r.width = width;
            rays.push_back(std::move(r));
          }
          break;  // rejected rays are discarded entirely
        }
      }
    }
  }
}

void median_pass(std::vector<double>& swt, std::vector<Ray>& rays) {
  // compute all medians from the first-pass raster, then apply the clamps;
  // two phases keep the result independent of ray order
  std::vector<double> medians(rays.size());
  std::vector<double> vals;
  for (size_t r = 0; r < rays.size(); ++r) {
    vals.clear();
    for (int p : rays[r].pixels)
      if (swt[p] >= 0.0) vals.push_back(swt[p]);
    if (vals.empty()) {
      medians[r] = rays[r].width;
      continue;
    }
    size_t mid = (vals.size() - 1) / 2;  // lower median
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    medians[r] = vals[mid];
  }
  for (size_t r = 0; r < rays.size(); ++r)
    for (int p : rays[r].pixels)
      if (swt[p] > medians[r]) swt[p] = medians[r];
}

std::vector<double> run_single_polarity(const GrayImage& image, const EdgeMask& edges,
                                        const SwtConfig& cfg, bool dark_on_light) {
  std::vector<double> swt(image.npixels(), StrokeWidthMap::kNoStroke);
  std::vector<Ray> rays;
  cast_rays(image, edges, cfg, dark_on_light, swt, rays);
  median_pass(swt, rays);
  return swt;
}

}  // namespace

StrokeWidthMap stroke_width_transform(const GrayImage& image, const SwtConfig& cfg) {
  cfg.validate();
  EdgeMask edges = detect_edges(image, cfg);

  std::vector<double> result;
  if (cfg.polarity == Polarity::Both) {
    std::vector<double> dark = run_single_polarity(image, edges, cfg, true);
    std::vector<double> light = run_single_polarity(image, edges, cfg, false);
    result.resize(dark.size());
    for (size_t i = 0; i < dark.size(); ++i) {
      double a = dark[i], b = light[i];
      if (a < 0.0) result[i] = b;
      else if (b < 0.0) result[i] = a;
      else result[i] = std::min(a, b);
    }
  } else {
    result = run_single_polarity(image, edges, cfg, cfg.polarity == Polarity::DarkOnLight);
  }

  StrokeWidthMap map;
  map.width = image.width;
  map.height = image.height;
  map.data = std::move(result);
  return map;
}

}  // namespace tad::swt
