// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "tad/datagen.hpp"
#include "tad/geometry.hpp"
#include "tad/io.hpp"
#include "tad/rng.hpp"
#include "tad/strokestats.hpp"
#include "tad/swt.hpp"
#include "tad/toymodel.hpp"
#include "testutil.hpp"

using namespace tad;
using namespace tad::datagen;
namespace fs = std::filesystem;

namespace {

SceneConfig small_cfg() {
  SceneConfig cfg;
  cfg.width = 96;
  cfg.height = 96;
  cfg.min_words = 1;
  cfg.max_words = 2;
  cfg.min_stroke = 3;
  cfg.max_stroke = 6;
  return cfg;
}

uint64_t hash_tree(const std::string& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (const fs::path& p : files) {
    std::string rel = fs::relative(p, root).string();
    h = tadtest::fnv1a(rel.data(), rel.size(), h);
    std::string bytes = io::read_file(p.string());
    h = tadtest::fnv1a(bytes.data(), bytes.size(), h);
  }
  return h;
}

}  // namespace

TEST_CASE("same seed renders the identical scene") {
  SceneConfig cfg = small_cfg();
  for (Domain d : {Domain::Source, Domain::Target}) {
    Scene a = render_scene(d, 42, cfg);
    Scene b = render_scene(d, 42, cfg);
    CHECK(a.image.data == b.image.data);
    REQUIRE(a.boxes.size() == b.boxes.size());
    for (size_t i = 0; i < a.boxes.size(); ++i)
      for (int k = 0; k < 4; ++k) {
        CHECK(a.boxes[i].v[k].x == b.boxes[i].v[k].x);
        CHECK(a.boxes[i].v[k].y == b.boxes[i].v[k].y);
      }
    Scene c = render_scene(d, 43, cfg);
    CHECK(a.image.data != c.image.data);
  }
}

TEST_CASE("ground-truth quads have positive area and live inside the image") {
  SceneConfig cfg = small_cfg();
  for (uint64_t seed = 0; seed < 12; ++seed) {
    for (Domain d : {Domain::Source, Domain::Target}) {
      Scene s = render_scene(d, seed, cfg);
      CHECK(s.boxes.size() == s.word_strokes.size());
      for (const QuadBox& q : s.boxes) {
        CHECK(q.area() > 0.0);
        for (const Vec2& v : q.v) {
          CHECK(v.x >= 0.0);
          CHECK(v.y >= 0.0);
          CHECK(v.x <= cfg.width);
          CHECK(v.y <= cfg.height);
        }
      }
    }
  }
}

TEST_CASE("source stroke widths: per-word SWT median within one pixel of the plant") {
  SceneConfig cfg = small_cfg();
  swt::SwtConfig swt_cfg;
  size_t words_checked = 0;
  for (uint64_t seed = 100; seed < 112; ++seed) {
    Scene s = render_scene(Domain::Source, seed, cfg);
    if (s.boxes.empty()) continue;
    StrokeWidthMap map = swt::stroke_width_transform(s.image, swt_cfg);
    for (size_t i = 0; i < s.boxes.size(); ++i) {
      auto widths = strokestats::collect_widths(map, s.boxes[i]);
      if (widths.size() < 10) continue;
      std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
      double median = widths[widths.size() / 2];
      INFO("seed ", seed, " word ", i, " planted ", s.word_strokes[i], " median ", median);
      CHECK(std::abs(median - double(s.word_strokes[i])) <= 1.0);
      ++words_checked;
    }
  }
  CHECK(words_checked >= 10);
}

TEST_CASE("target distractor patches measure erratic stroke widths on the final image") {
  SceneConfig cfg = small_cfg();
  swt::SwtConfig swt_cfg;
  strokestats::TstConfig stats_cfg;
  size_t patches = 0;
  for (uint64_t seed = 200; seed < 208; ++seed) {
    Scene s = render_scene(Domain::Target, seed, cfg);
    StrokeWidthMap map = swt::stroke_width_transform(s.image, swt_cfg);
    for (const QuadBox& region : s.distractor_regions) {
      auto widths = strokestats::collect_widths(map, region);
      auto st = strokestats::stroke_stats(widths, stats_cfg);
      REQUIRE(st.n_samples >= 10);
      CHECK(st.sigma > 3.0);
      ++patches;
    }
  }
  CHECK(patches >= 4);
}

TEST_CASE("make_dataset writes the full tree, byte-identical across regenerations") {
  SceneConfig cfg = small_cfg();
  std::string root_a = (fs::temp_directory_path() / "tad_ds_a").string();
  std::string root_b = (fs::temp_directory_path() / "tad_ds_b").string();
  fs::remove_all(root_a);
  fs::remove_all(root_b);

  DatasetSummary sum = make_dataset(root_a, 5, 4, 3, 777, cfg, 2);
  CHECK(sum.n_source == 5);

  for (auto [split, count] : {std::pair{"source", 5}, {"target_train", 4}, {"target_test", 3}}) {
    for (int i = 0; i < count; ++i) {
      std::string id = image_id(i);
      CHECK(fs::exists(fs::path(root_a) / split / (id + ".pgm")));
      CHECK(fs::exists(fs::path(root_a) / split / ("gt_" + id + ".txt")));
    }
  }
  CHECK(fs::exists(fs::path(root_a) / "manifest.json"));

  make_dataset(root_b, 5, 4, 3, 777, cfg, 1);  // different job count, same bytes
  CHECK(hash_tree(root_a) == hash_tree(root_b));

  fs::remove_all(root_b);
  make_dataset(root_b, 5, 4, 3, 778, cfg, 1);
  CHECK(hash_tree(root_a) != hash_tree(root_b));

  fs::remove_all(root_a);
  fs::remove_all(root_b);
}

TEST_CASE("the two domains are linearly separable on frozen handcrafted features") {
  SceneConfig cfg = small_cfg();
  std::vector<std::vector<double>> x_train, x_test;
  std::vector<uint8_t> y_train, y_test;
  for (int i = 0; i < 48; ++i) {
    Domain d = i % 2 ? Domain::Target : Domain::Source;
    Scene s = render_scene(d, 5000 + uint64_t(i), cfg);
    model::FeatureRaster f = model::extract_features(s.image);
    std::vector<double> pooled(model::kFeatures);
    for (int c = 0; c < model::kFeatures; ++c) {
      double acc = 0.0;
      for (size_t k = 0; k < f.npixels(); ++k) acc += f.plane(c)[k];
      pooled[c] = acc / double(f.npixels());
    }
    if (i < 32) {
      x_train.push_back(pooled);
      y_train.push_back(i % 2);
    } else {
      x_test.push_back(pooled);
      y_test.push_back(i % 2);
    }
  }
  model::ProbeResult probe = model::fit_logistic_probe(x_train, y_train, x_test, y_test);
  CHECK(probe.test_accuracy >= 0.9);
}
