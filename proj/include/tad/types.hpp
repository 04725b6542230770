// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tad {

// Malformed or inconsistent on-disk data (bad magic, truncation, size
// mismatch, unparsable text). CLI maps this to exit code 2.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during training. CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

namespace detail {
void check_raster(const char* what, int width, int height, size_t len);
}

// Single-channel luminance raster, values in [0,1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(size_t(w) * size_t(h), fill) {
    detail::check_raster("GrayImage", w, h, data.size());
  }
  static GrayImage from_data(int w, int h, std::vector<double> d);

  double& at(int x, int y) { return data[size_t(y) * width + x]; }
  double at(int x, int y) const { return data[size_t(y) * width + x]; }
  size_t npixels() const { return data.size(); }
};

// Per-pixel text confidence in [0,1]; also carries 0/1 ground truth.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ScoreMap() = default;
  ScoreMap(int w, int h, double fill = 0.0)
      : width(w), height(h), data(size_t(w) * size_t(h), fill) {
    detail::check_raster("ScoreMap", w, h, data.size());
  }
  static ScoreMap from_data(int w, int h, std::vector<double> d);

  double& at(int x, int y) { return data[size_t(y) * width + x]; }
  double at(int x, int y) const { return data[size_t(y) * width + x]; }
  size_t npixels() const { return data.size(); }
};

// Per-pixel stroke width in pixels; kNoStroke marks uncovered pixels.
struct StrokeWidthMap {
  static constexpr double kNoStroke = -1.0;

  int width = 0;
  int height = 0;
  std::vector<double> data;

  StrokeWidthMap() = default;
  StrokeWidthMap(int w, int h)
      : width(w), height(h), data(size_t(w) * size_t(h), kNoStroke) {
    detail::check_raster("StrokeWidthMap", w, h, data.size());
  }
  static StrokeWidthMap from_data(int w, int h, std::vector<double> d);

  double& at(int x, int y) { return data[size_t(y) * width + x]; }
  double at(int x, int y) const { return data[size_t(y) * width + x]; }
  bool has_stroke(int x, int y) const { return at(x, y) != kNoStroke; }
};

// Four-vertex text box, sub-pixel coordinates, clockwise in image
// coordinates (y down, positive shoelace). ignore marks don't-care
// regions (ICDAR "###"): they never count as FP or FN in evaluation.
struct QuadBox {
  std::array<Vec2, 4> v{};
  double confidence = 1.0;
  bool ignore = false;

  double area() const;
  bool convex() const;
};

enum class PixelState : uint8_t {
  Ignored = 0,
  NegativeKept = 1,
  Positive = 2,
};

// Exhaustive, mutually exclusive per-pixel partition used by the weak
// score loss: trusted background, trusted text, or excluded from the loss.
struct PixelPartition {
  int width = 0;
  int height = 0;
  std::vector<PixelState> state;

  PixelPartition() = default;
  PixelPartition(int w, int h, PixelState fill = PixelState::Ignored)
      : width(w), height(h), state(size_t(w) * size_t(h), fill) {
    detail::check_raster("PixelPartition", w, h, state.size());
  }

  PixelState& at(int x, int y) { return state[size_t(y) * width + x]; }
  PixelState at(int x, int y) const { return state[size_t(y) * width + x]; }
  size_t count(PixelState s) const;
};

// Machine-generated target-domain annotation: kept boxes plus the
// negative-sample partition.
struct PseudoLabel {
  std::string image_id;
  std::vector<QuadBox> boxes;
  PixelPartition partition;
};

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;

  static DetectionMetrics from_pr(double p, double r) {
    DetectionMetrics m;
    m.precision = p;
    m.recall = r;
    m.fscore = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    return m;
  }
};

}  // namespace tad
