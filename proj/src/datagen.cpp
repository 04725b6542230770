// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>

#include <json.hpp>

#include "tad/geometry.hpp"
#include "tad/io.hpp"
#include "tad/parallel.hpp"
#include "tad/rng.hpp"
#include "tad/strokestats.hpp"
#include "tad/swt.hpp"

namespace fs = std::filesystem;

namespace tad::datagen {

void SceneConfig::validate() const {
  if (width < 32 || height < 32)
    throw std::invalid_argument("SceneConfig: image must be at least 32x32");
  if (min_words < 0 || max_words < min_words)
    throw std::invalid_argument("SceneConfig: bad word count range");
  if (min_stroke < 2 || max_stroke < min_stroke)
    throw std::invalid_argument("SceneConfig: bad stroke width range");
  if (min_distractors < 0 || max_distractors < min_distractors)
    throw std::invalid_argument("SceneConfig: bad distractor count range");
}

namespace {

struct Segment {
  Vec2 a, b;
};

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  Vec2 c = a + t * ab;
  return std::hypot(p.x - c.x, p.y - c.y);
}

// Pixels whose center falls inside the capsule (segment dilated by radius).
void collect_capsule_pixels(int width, int height, Segment s, double radius,
                            std::vector<size_t>& out) {
  int x0 = std::max(0, int(std::floor(std::min(s.a.x, s.b.x) - radius - 1)));
  int x1 = std::min(width - 1, int(std::ceil(std::max(s.a.x, s.b.x) + radius + 1)));
  int y0 = std::max(0, int(std::floor(std::min(s.a.y, s.b.y) - radius - 1)));
  int y1 = std::min(height - 1, int(std::ceil(std::max(s.a.y, s.b.y) + radius + 1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (dist_point_segment({x + 0.5, y + 0.5}, s.a, s.b) <= radius)
        out.push_back(size_t(y) * width + x);
}

void stamp_segment(GrayImage& img, Segment s, double radius, double value,
                   std::vector<size_t>* touched) {
  std::vector<size_t> pixels;
  collect_capsule_pixels(img.width, img.height, s, radius, pixels);
  for (size_t i : pixels) img.data[i] = value;
  if (touched) touched->insert(touched->end(), pixels.begin(), pixels.end());
}

// A stick "letter" in the unit square: a left vertical bar plus a few
// strokes attached to it, so each glyph is one connected component.
std::vector<Segment> make_letter(Rng& rng) {
  std::vector<Segment> segs;
  segs.push_back({{0, 0}, {0, 1}});
  int extras = rng.uniform_int(2, 3);
  for (int i = 0; i < extras; ++i) {
    switch (rng.uniform_int(0, 5)) {
      case 0: segs.push_back({{0, 0}, {1, 0}}); break;          // top bar
      case 1: segs.push_back({{0, 0.5}, {1, 0.5}}); break;      // mid bar
      case 2: segs.push_back({{0, 1}, {1, 1}}); break;          // bottom bar
      case 3: segs.push_back({{0, 0}, {1, 1}}); break;          // falling diagonal
      case 4: segs.push_back({{1, 0}, {1, 1}}); break;          // right bar
      default: segs.push_back({{0, 1}, {1, 0.4}}); break;       // rising diagonal
    }
  }
  return segs;
}

struct WordPlan {
  std::vector<Segment> segments;  // image coordinates
  double stroke_width = 3.0;
  double ink = 0.05;
  Vec2 aabb_min, aabb_max;  // including the ink radius
};

// Lays out a rotated pseudo-word around `center`. Letters are at least
// 4.6 stroke widths tall so the strokes stay distinct instead of merging
// into blobs (real glyphs run at roughly 0.1-0.2 stroke-to-height).
WordPlan plan_word(Rng& rng, Vec2 center, int stroke_width, double ink, int max_height) {
  WordPlan plan;
  plan.stroke_width = stroke_width;
  plan.ink = ink;
  double letter_h = std::min(stroke_width * rng.uniform(4.6, 6.2), double(max_height));
  letter_h = std::max(letter_h, 4.6 * stroke_width);
  double letter_w = 0.62 * letter_h;
  double gap = 0.18 * letter_h;  // tight tracking keeps word regions contiguous
  int letters = rng.uniform_int(2, 3);
  double angle = rng.uniform(-0.42, 0.42);
  double ca = std::cos(angle), sa = std::sin(angle);

  double total_w = letters * letter_w + (letters - 1) * gap;
  Vec2 local_center{total_w / 2.0, letter_h / 2.0};

  for (int li = 0; li < letters; ++li) {
    double ox = li * (letter_w + gap);
    for (const Segment& s : make_letter(rng)) {
      auto map = [&](Vec2 p) {
        Vec2 local{ox + p.x * letter_w - local_center.x, p.y * letter_h - local_center.y};
        return Vec2{center.x + ca * local.x - sa * local.y,
                    center.y + sa * local.x + ca * local.y};
      };
      plan.segments.push_back({map(s.a), map(s.b)});
    }
  }

  double r = stroke_width / 2.0;
  plan.aabb_min = {1e300, 1e300};
  plan.aabb_max = {-1e300, -1e300};
  for (const Segment& s : plan.segments) {
    for (Vec2 p : {s.a, s.b}) {
      plan.aabb_min.x = std::min(plan.aabb_min.x, p.x - r);
      plan.aabb_min.y = std::min(plan.aabb_min.y, p.y - r);
      plan.aabb_max.x = std::max(plan.aabb_max.x, p.x + r);
      plan.aabb_max.y = std::max(plan.aabb_max.y, p.y + r);
    }
  }
  return plan;
}

bool aabb_overlaps(Vec2 amin, Vec2 amax, Vec2 bmin, Vec2 bmax, double pad) {
  return amin.x - pad < bmax.x && bmin.x - pad < amax.x && amin.y - pad < bmax.y &&
         bmin.y - pad < amax.y;
}

QuadBox quad_from_pixels(const std::vector<size_t>& pixels, int width) {
  std::vector<Vec2> corners;
  corners.reserve(pixels.size() * 4);
  for (size_t idx : pixels) {
    double x = double(idx % size_t(width));
    double y = double(idx / size_t(width));
    corners.push_back({x, y});
    corners.push_back({x + 1, y});
    corners.push_back({x, y + 1});
    corners.push_back({x + 1, y + 1});
  }
  QuadBox q;
  q.v = geometry::min_area_rect(corners);
  return q;
}

// Two-octave bilinear value noise in [0,1].
std::vector<double> value_noise(Rng& rng, int w, int h, int base_cell) {
  std::vector<double> out(size_t(w) * h, 0.0);
  double total_amp = 0.0;
  for (int octave = 0; octave < 2; ++octave) {
    int cell = octave == 0 ? base_cell : std::max(2, base_cell / 2);
    double amp = octave == 0 ? 1.0 : 0.5;
    total_amp += amp;
    int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<double> grid(size_t(gw) * gh);
    for (double& g : grid) g = rng.uniform01();
    for (int y = 0; y < h; ++y) {
      double fy = double(y) / cell;
      int cy = int(fy);
      double ty = fy - cy;
      for (int x = 0; x < w; ++x) {
        double fx = double(x) / cell;
        int cx = int(fx);
        double tx = fx - cx;
        double v00 = grid[size_t(cy) * gw + cx], v10 = grid[size_t(cy) * gw + cx + 1];
        double v01 = grid[size_t(cy + 1) * gw + cx], v11 = grid[size_t(cy + 1) * gw + cx + 1];
        double v = (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
        out[size_t(y) * w + x] += amp * v;
      }
    }
  }
  for (double& v : out) v /= total_amp;
  return out;
}

struct DistractorPlan {
  std::vector<Segment> segments;  // stamped with per-segment radii
  std::vector<double> radii;
  double ink = 0.1;
  Vec2 aabb_min, aabb_max;
  QuadBox region;  // validation region
};

// Hatched patch: parallel stripes of strongly mixed widths, or a lumpy
// blob built from disks of different radii. Both have erratic stroke
// widths on purpose.
DistractorPlan plan_distractor(Rng& rng, Vec2 center, double ink, double scale) {
  DistractorPlan plan;
  plan.ink = ink;
  bool hatch = rng.coin(0.6);
  std::vector<Vec2> extent_corners;

  if (hatch) {
    double len = scale * rng.uniform(0.85, 1.15);
    double angle = rng.uniform(0.0, 3.14159265358979);
    Vec2 dir{std::cos(angle), std::sin(angle)};
    Vec2 nrm{-dir.y, dir.x};
    const double widths[] = {2.0, 10.0, 3.0, 12.0, 2.0, 9.0};
    double offset = -scale * 0.55;
    for (double wdt : widths) {
      if (offset + wdt > scale * 0.55) break;
      Vec2 c = center + (offset + wdt / 2.0) * nrm;
      Segment s{c + (-len / 2.0) * dir, c + (len / 2.0) * dir};
      plan.segments.push_back(s);
      plan.radii.push_back(wdt / 2.0);
      offset += wdt + rng.uniform(2.5, 4.0);
    }
  } else {
    int disks = rng.uniform_int(4, 7);
    for (int i = 0; i < disks; ++i) {
      double r = rng.uniform(1.5, 6.0);
      Vec2 c = center + Vec2{rng.uniform(-scale * 0.4, scale * 0.4),
                             rng.uniform(-scale * 0.4, scale * 0.4)};
      plan.segments.push_back({c, c});
      plan.radii.push_back(r);
    }
  }

  plan.aabb_min = {1e300, 1e300};
  plan.aabb_max = {-1e300, -1e300};
  for (size_t i = 0; i < plan.segments.size(); ++i) {
    for (Vec2 p : {plan.segments[i].a, plan.segments[i].b}) {
      double r = plan.radii[i];
      plan.aabb_min.x = std::min(plan.aabb_min.x, p.x - r);
      plan.aabb_min.y = std::min(plan.aabb_min.y, p.y - r);
      plan.aabb_max.x = std::max(plan.aabb_max.x, p.x + r);
      plan.aabb_max.y = std::max(plan.aabb_max.y, p.y + r);
      extent_corners.push_back({p.x - r, p.y - r});
      extent_corners.push_back({p.x + r, p.y - r});
      extent_corners.push_back({p.x + r, p.y + r});
      extent_corners.push_back({p.x - r, p.y + r});
    }
  }
  plan.region.v = geometry::min_area_rect(extent_corners);
  return plan;
}

void add_noise_and_clamp(GrayImage& img, const std::vector<double>& noise) {
  for (size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = std::clamp(img.data[i] + noise[i], 0.0, 1.0);
}

}  // namespace

Scene render_scene(Domain domain, uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(seed, "scene"));
  const int w = cfg.width, h = cfg.height;
  const bool target = domain == Domain::Target;

  Scene scene;
  scene.image = GrayImage(w, h);
  GrayImage& img = scene.image;

  // background: the domain gap lives in texture, noise, word contrast and
  // distractors, not in a wholesale luminance shift. Per-image jitter keeps
  // within-domain appearance diverse so no single microscopic statistic
  // pins the domain.
  double bg_base;
  if (target) {
    bg_base = rng.uniform(0.74, 0.92);
    double amp = cfg.texture_amplitude * rng.uniform(0.7, 1.4);
    std::vector<double> tex = value_noise(rng, w, h, cfg.texture_cell);
    for (size_t i = 0; i < img.data.size(); ++i)
      img.data[i] = std::clamp(bg_base + amp * (tex[i] - 0.5), 0.0, 1.0);
  } else {
    bg_base = rng.uniform(0.78, 0.96);
    std::fill(img.data.begin(), img.data.end(), bg_base);
  }

  // pre-drawn per-pixel noise so distractor validation sees the final image
  std::vector<double> noise(img.data.size(), 0.0);
  if (target) {
    double sigma = cfg.noise_sigma * rng.uniform(0.7, 1.4);
    for (double& v : noise) v = rng.normal(0.0, sigma);
  }

  const double margin = 3.0;
  std::vector<std::pair<Vec2, Vec2>> occupied;

  // words; stroke widths capped so letters fit the image at sane proportions
  const int stroke_cap = std::max(2, int(double(h / 3) / 4.6));
  int want_words = rng.uniform_int(cfg.min_words, cfg.max_words);
  for (int wi = 0; wi < want_words; ++wi) {
    int stroke = rng.uniform_int(cfg.min_stroke, std::max(cfg.min_stroke,
                                                          std::min(cfg.max_stroke, stroke_cap)));
    // Contrast distributions largely overlap across domains so that a
    // domain-invariant detector exists; the target keeps a low-contrast
    // tail the source never shows, which is where its false negatives
    // come from.
    double contrast = target ? rng.uniform(cfg.target_contrast_min, cfg.target_contrast_max)
                             : rng.uniform(cfg.source_contrast_min, cfg.source_contrast_max);
    double ink = std::clamp(bg_base - contrast, 0.01, 0.95);

    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      Vec2 center{rng.uniform(margin + 10, w - margin - 10),
                  rng.uniform(margin + 8, h - margin - 8)};
      WordPlan plan = plan_word(rng, center, stroke, ink, h / 3);
      if (plan.aabb_min.x < margin || plan.aabb_min.y < margin ||
          plan.aabb_max.x > w - margin || plan.aabb_max.y > h - margin)
        continue;
      bool clash = false;
      for (const auto& [omin, omax] : occupied)
        if (aabb_overlaps(plan.aabb_min, plan.aabb_max, omin, omax, 3.0)) {
          clash = true;
          break;
        }
      if (clash) continue;

      // dry-run the ink to get the exact quad, then check it fits
      std::vector<size_t> touched;
      for (const Segment& s : plan.segments)
        collect_capsule_pixels(w, h, s, plan.stroke_width / 2.0, touched);
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      if (touched.empty()) continue;
      QuadBox quad = quad_from_pixels(touched, w);
      bool quad_ok = true;
      for (const Vec2& v : quad.v)
        if (v.x < 0.0 || v.y < 0.0 || v.x > double(w) || v.y > double(h)) quad_ok = false;
      if (!quad_ok) continue;

      for (size_t idx : touched) img.data[idx] = plan.ink;
      scene.boxes.push_back(quad);
      scene.word_strokes.push_back(stroke);
      occupied.emplace_back(plan.aabb_min, plan.aabb_max);
      placed = true;
    }
    if (!placed) ++scene.words_dropped;
  }

  // distractors, target only, validated to have erratic stroke widths
  if (target) {
    swt::SwtConfig swt_cfg;  // dark clutter on a lighter background
    strokestats::TstConfig stats_cfg;
    int want = rng.uniform_int(cfg.min_distractors, cfg.max_distractors);
    double scale = 0.24 * std::min(w, h);
    for (int di = 0; di < want; ++di) {
      for (int attempt = 0; attempt < 12; ++attempt) {
        Rng drng(derive_seed(seed, 0xd15 + uint64_t(di) * 64 + uint64_t(attempt)));
        Vec2 center{drng.uniform(margin + scale * 0.6, w - margin - scale * 0.6),
                    drng.uniform(margin + scale * 0.6, h - margin - scale * 0.6)};
        double ink = std::clamp(bg_base - drng.uniform(0.50, 0.64), 0.01, 0.95);
        DistractorPlan plan = plan_distractor(drng, center, ink, scale);
        if (plan.segments.empty()) continue;
        if (plan.aabb_min.x < margin || plan.aabb_min.y < margin ||
            plan.aabb_max.x > w - margin || plan.aabb_max.y > h - margin)
          continue;
        bool clash = false;
        for (const auto& [omin, omax] : occupied)
          if (aabb_overlaps(plan.aabb_min, plan.aabb_max, omin, omax, 3.0)) {
            clash = true;
            break;
          }
        if (clash) continue;

        // validate on a copy carrying the final noise
        GrayImage trial = img;
        for (size_t i = 0; i < plan.segments.size(); ++i)
          stamp_segment(trial, plan.segments[i], plan.radii[i], plan.ink, nullptr);
        GrayImage noisy = trial;
        add_noise_and_clamp(noisy, noise);
        StrokeWidthMap swt_map = swt::stroke_width_transform(noisy, swt_cfg);
        auto widths = strokestats::collect_widths(swt_map, plan.region);
        auto stats = strokestats::stroke_stats(widths, stats_cfg);
        if (stats.n_samples < 10 || stats.sigma <= 3.0) continue;

        img = std::move(trial);
        occupied.emplace_back(plan.aabb_min, plan.aabb_max);
        scene.distractor_regions.push_back(plan.region);
        break;
      }
    }
  }

  if (target) add_noise_and_clamp(img, noise);
  return scene;
}

std::string image_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "img_%05d", index);
  return buf;
}

namespace {

int write_split(const std::string& dir, Domain domain, int count, uint64_t split_seed,
                const SceneConfig& cfg, int jobs) {
  fs::create_directories(dir);
  std::vector<int> dropped(size_t(std::max(count, 0)), 0);
  parallel_for(size_t(count), jobs, [&](size_t i) {
    Scene scene = render_scene(domain, derive_seed(split_seed, uint64_t(i)), cfg);
    std::string id = image_id(int(i));
    io::write_pgm(scene.image, dir + "/" + id + ".pgm");
    io::write_icdar_boxes(scene.boxes, dir + "/gt_" + id + ".txt");
    dropped[i] = scene.words_dropped;
  });
  int total = 0;
  for (int d : dropped) total += d;
  return total;
}

}  // namespace

DatasetSummary make_dataset(const std::string& root, int n_source, int n_target_train,
                            int n_target_test, uint64_t seed, const SceneConfig& cfg,
                            int jobs) {
  cfg.validate();
  if (n_source < 1 || n_target_train < 1 || n_target_test < 1)
    throw std::invalid_argument("make_dataset: all split sizes must be >= 1");

  DatasetSummary summary;
  summary.root = root;
  summary.n_source = n_source;
  summary.n_target_train = n_target_train;
  summary.n_target_test = n_target_test;

  fs::create_directories(root);
  summary.words_dropped += write_split(root + "/source", Domain::Source, n_source,
                                       derive_seed(seed, "source"), cfg, jobs);
  summary.words_dropped += write_split(root + "/target_train", Domain::Target, n_target_train,
                                       derive_seed(seed, "target_train"), cfg, jobs);
  summary.words_dropped += write_split(root + "/target_test", Domain::Target, n_target_test,
                                       derive_seed(seed, "target_test"), cfg, jobs);

  nlohmann::json manifest;
  manifest["format"] = "textadapt-dataset";
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["counts"] = {{"source", n_source},
                        {"target_train", n_target_train},
                        {"target_test", n_target_test}};
  manifest["config"] = {{"width", cfg.width},
                        {"height", cfg.height},
                        {"min_words", cfg.min_words},
                        {"max_words", cfg.max_words},
                        {"min_stroke", cfg.min_stroke},
                        {"max_stroke", cfg.max_stroke},
                        {"texture_amplitude", cfg.texture_amplitude},
                        {"noise_sigma", cfg.noise_sigma},
                        {"target_contrast_min", cfg.target_contrast_min},
                        {"target_contrast_max", cfg.target_contrast_max},
                        {"min_distractors", cfg.min_distractors},
                        {"max_distractors", cfg.max_distractors}};
  manifest["words_dropped"] = summary.words_dropped;
  io::write_file(root + "/manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace tad::datagen
