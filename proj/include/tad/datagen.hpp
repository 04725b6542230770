// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tad/types.hpp"

namespace tad::datagen {

enum class Domain { Source, Target };

struct SceneConfig {
  int width = 256;
  int height = 256;
  int min_words = 1;
  int max_words = 6;
  int min_stroke = 3;  // px, uniform per word
  int max_stroke = 9;

  // word ink contrast against the background, per domain
  double source_contrast_min = 0.40;
  double source_contrast_max = 0.82;
  double target_contrast_min = 0.33;
  double target_contrast_max = 0.67;

  // target-domain appearance
  double texture_amplitude = 0.16;   // value-noise background modulation
  int texture_cell = 11;             // value-noise lattice pitch in pixels
  double noise_sigma = 0.035;        // additive Gaussian pixel noise
  int min_distractors = 1;           // high-stroke-variance clutter, target only
  int max_distractors = 3;

  void validate() const;
};

struct Scene {
  GrayImage image;
  std::vector<QuadBox> boxes;      // exact ground truth, one per word
  std::vector<int> word_strokes;   // planted stroke width per box
  std::vector<QuadBox> distractor_regions;  // analysis metadata, never ground truth
  int words_dropped = 0;           // placement gave up after 100 tries
};

// Fully seeded scene: pseudo-words drawn as connected constant-width
// strokes at random rotations. Source scenes are flat, high-contrast and
// clean; target scenes get a textured background, contrast jitter, noise,
// and distractor patches whose stroke-width deviation is forced above 3.0
// (checked with the stroke-width transform at generation time; failing
// patches are re-drawn).
Scene render_scene(Domain domain, uint64_t seed, const SceneConfig& cfg);

struct DatasetSummary {
  std::string root;
  int n_source = 0;
  int n_target_train = 0;
  int n_target_test = 0;
  int words_dropped = 0;
};

// Writes <root>/{source,target_train,target_test}/{img_%05d.pgm,
// gt_img_%05d.txt} plus manifest.json. Target-train ground truth is
// written for analysis only; training code never reads it. Regenerating
// with the same seed yields a byte-identical tree.
DatasetSummary make_dataset(const std::string& root, int n_source, int n_target_train,
                            int n_target_test, uint64_t seed, const SceneConfig& cfg,
                            int jobs = 1);

std::string image_id(int index);  // "img_%05d"

}  // namespace tad::datagen
