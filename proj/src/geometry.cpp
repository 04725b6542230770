// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tad {

namespace detail {
void check_raster(const char* what, int width, int height, size_t len) {
  if (width < 1 || height < 1)
    throw std::invalid_argument(std::string(what) + ": width and height must be >= 1");
  if (len != size_t(width) * size_t(height))
    throw std::invalid_argument(std::string(what) + ": data length != width*height");
}
}  // namespace detail

GrayImage GrayImage::from_data(int w, int h, std::vector<double> d) {
  detail::check_raster("GrayImage", w, h, d.size());
  for (double v : d)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("GrayImage: luminance outside [0,1]");
  GrayImage img;
  img.width = w;
  img.height = h;
  img.data = std::move(d);
  return img;
}

ScoreMap ScoreMap::from_data(int w, int h, std::vector<double> d) {
  detail::check_raster("ScoreMap", w, h, d.size());
  for (double v : d)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("ScoreMap: confidence outside [0,1]");
  ScoreMap m;
  m.width = w;
  m.height = h;
  m.data = std::move(d);
  return m;
}

StrokeWidthMap StrokeWidthMap::from_data(int w, int h, std::vector<double> d) {
  detail::check_raster("StrokeWidthMap", w, h, d.size());
  const double diag = std::hypot(double(w), double(h));
  for (double v : d)
    if (v != StrokeWidthMap::kNoStroke && !(v >= 1.0 && v <= diag))
      throw std::invalid_argument("StrokeWidthMap: width outside [1, diagonal]");
  StrokeWidthMap m;
  m.width = w;
  m.height = h;
  m.data = std::move(d);
  return m;
}

size_t PixelPartition::count(PixelState s) const {
  size_t n = 0;
  for (PixelState st : state) n += (st == s);
  return n;
}

double QuadBox::area() const {
  return std::abs(geometry::signed_area(std::span<const Vec2>(v.data(), 4)));
}

bool QuadBox::convex() const {
  // all cross products of consecutive edges share a sign (zero allowed
  // only if the polygon never turns the other way)
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    Vec2 a = v[(i + 1) % 4] - v[i];
    Vec2 b = v[(i + 2) % 4] - v[(i + 1) % 4];
    double c = cross(a, b);
    if (c > 1e-12) {
      if (sign < 0) return false;
      sign = 1;
    } else if (c < -1e-12) {
      if (sign > 0) return false;
      sign = -1;
    }
  }
  return true;
}

namespace geometry {

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

namespace {

bool on_segment(Vec2 p, Vec2 a, Vec2 b, double eps = 1e-9) {
  double c = cross(b - a, p - a);
  if (std::abs(c) > eps * std::max(1.0, std::hypot(b.x - a.x, b.y - a.y)))
    return false;
  double d = dot(p - a, b - a);
  return d >= -eps && d <= dot(b - a, b - a) + eps;
}

}  // namespace

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    if (on_segment(p, poly[i], poly[(i + 1) % n])) return true;

  // crossing number on the horizontal ray towards +x
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;

  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::array<Vec2, 4> min_area_rect(std::span<const Vec2> pts) {
  if (pts.empty()) throw std::invalid_argument("min_area_rect: no points");
  std::vector<Vec2> hull = convex_hull(std::vector<Vec2>(pts.begin(), pts.end()));

  std::array<Vec2, 4> best{};
  double best_area = std::numeric_limits<double>::infinity();

  auto consider = [&](Vec2 dir) {
    double len = std::hypot(dir.x, dir.y);
    if (len < 1e-12) return;
    Vec2 u{dir.x / len, dir.y / len};
    Vec2 v{-u.y, u.x};
    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (const Vec2& p : hull) {
      double pu = dot(p, u), pv = dot(p, v);
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    double a = (umax - umin) * (vmax - vmin);
    if (a < best_area - 1e-12) {
      best_area = a;
      best = {Vec2{umin * u.x + vmin * v.x, umin * u.y + vmin * v.y},
              Vec2{umax * u.x + vmin * v.x, umax * u.y + vmin * v.y},
              Vec2{umax * u.x + vmax * v.x, umax * u.y + vmax * v.y},
              Vec2{umin * u.x + vmax * v.x, umin * u.y + vmax * v.y}};
    }
  };

  if (hull.size() == 1) {
    return {hull[0], hull[0], hull[0], hull[0]};
  }
  for (size_t i = 0; i < hull.size(); ++i)
    consider(hull[(i + 1) % hull.size()] - hull[i]);

  // normalize: positive orientation (clockwise on screen), start at the
  // lexicographically smallest (y, x) corner
  std::array<Vec2, 4> q = best;
  if (signed_area(std::span<const Vec2>(q.data(), 4)) < 0.0)
    std::swap(q[1], q[3]);
  int start = 0;
  for (int i = 1; i < 4; ++i)
    if (q[i].y < q[start].y - 1e-12 ||
        (std::abs(q[i].y - q[start].y) <= 1e-12 && q[i].x < q[start].x))
      start = i;
  std::array<Vec2, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = q[(start + i) % 4];
  return out;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject,
                              std::span<const Vec2> clip) {
  std::vector<Vec2> output(subject.begin(), subject.end());
  const size_t m = clip.size();
  for (size_t i = 0; i < m && !output.empty(); ++i) {
    Vec2 a = clip[i];
    Vec2 b = clip[(i + 1) % m];
    std::vector<Vec2> input;
    input.swap(output);
    const size_t n = input.size();
    for (size_t j = 0; j < n; ++j) {
      Vec2 p = input[j];
      Vec2 q = input[(j + 1) % n];
      // positive orientation: inside is the left... with y-down positive
      // shoelace, inside of edge a->b is where cross(b-a, p-a) >= 0
      double sp = cross(b - a, p - a);
      double sq = cross(b - a, q - a);
      if (sp >= 0.0) output.push_back(p);
      if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
        double t = sp / (sp - sq);
        output.push_back(p + t * (q - p));
      }
    }
  }
  return output;
}

std::array<Vec2, 4> oriented(const QuadBox& q) {
  std::array<Vec2, 4> out = q.v;
  if (signed_area(std::span<const Vec2>(out.data(), 4)) < 0.0)
    std::swap(out[1], out[3]);
  return out;
}

}  // namespace geometry
}  // namespace tad
