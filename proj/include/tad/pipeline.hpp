// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tad/eval.hpp"
#include "tad/strokestats.hpp"
#include "tad/swt.hpp"
#include "tad/toymodel.hpp"
#include "tad/types.hpp"

namespace tad::pipeline {

// ---- data loading -------------------------------------------------------------

struct LoadedImage {
  std::string id;
  GrayImage image;
  std::vector<QuadBox> gt;  // empty when ground truth is withheld
  bool has_gt = false;
};

struct DomainData {
  std::vector<LoadedImage> images;
};

// Reads img_*.pgm (and gt_img_*.txt when with_gt) from one split
// directory. with_gt=false never opens the label files, which is how the
// target-train split stays honest.
DomainData load_split(const std::string& dir, bool with_gt, int jobs = 1);

// ---- score-map post-processing --------------------------------------------------

// Threshold the map, take 8-connected components, fit a minimum-area
// rotated rectangle to each, and drop rectangles smaller than
// min_box_area. Box confidence is the mean score over its component.
std::vector<QuadBox> extract_boxes(const ScoreMap& scores, double score_threshold,
                                   double min_box_area);

// 0/1 raster from the non-ignored boxes (pixel-center containment).
ScoreMap rasterize_boxes(const std::vector<QuadBox>& boxes, int width, int height);

// ---- prepared training samples ---------------------------------------------------

struct PreparedSample {
  std::string id;
  model::FeatureRaster features;
  ScoreMap gt;
  PixelPartition partition;
  bool has_gt = false;
  bool has_partition = false;
  uint8_t domain_label = 0;
};

std::vector<PreparedSample> prepare_source(const DomainData& data, int jobs = 1);
std::vector<PreparedSample> prepare_target(const DomainData& data, int jobs = 1);

// Non-owning views for the training loop; `prepared` must outlive them.
std::vector<model::Sample> sample_views(const std::vector<PreparedSample>& prepared);

// ---- pseudo-labels ---------------------------------------------------------------

struct PseudoLabelStats {
  size_t images = 0;
  size_t boxes_extracted = 0;
  size_t boxes_kept = 0;
  size_t rejected_sigma = 0;
  size_t rejected_sws = 0;
  size_t low_evidence = 0;
};

struct PseudoLabelBatch {
  std::vector<PseudoLabel> labels;          // one per image, image order preserved
  std::vector<std::string> reports;         // per-image rejection report text
  PseudoLabelStats stats;
};

// Stage-2 label generation: predict, extract boxes, filter them by
// stroke-width statistics, mark kept-box interiors positive, then keep
// the eta lowest-confidence fraction of the remaining pixels as trusted
// negatives (the rest is ignored).
PseudoLabelBatch generate_pseudo_labels(const model::ToyModel& m, const DomainData& target,
                                        const strokestats::TstConfig& tst,
                                        const swt::SwtConfig& swt_cfg, int jobs = 1);

// Persists labels as gt_<id>.txt + part_<id>.smap (+ rej_<id>.txt) and a
// manifest.json carrying ids, the seed and a config hash.
void write_pseudo_labels(const std::string& dir, const PseudoLabelBatch& batch,
                         uint64_t seed, const std::string& config_hash);
std::vector<PseudoLabel> read_pseudo_labels(const std::string& dir);

// Installs partitions (and the derived 0/1 positives raster) into
// prepared target samples; ids must match.
void apply_pseudo_labels(std::vector<PreparedSample>& target,
                         const std::vector<PseudoLabel>& labels);

// ---- the two-stage strategy --------------------------------------------------------

struct AdaptConfig {
  model::AtaConfig pretrain;
  model::AtaConfig finetune;
  strokestats::TstConfig tst;
  swt::SwtConfig swt;
  losses::LossConfig loss;
  bool self_train = true;  // false: stop after stage 1
  int jobs = 1;

  AdaptConfig() {
    finetune.lambda = 0.2;  // domain confusion stays on during fine-tuning
  }
};

// Fine-tuning: weak loss over the stored partitions on target, balanced
// loss on source, domain confusion still active unless lambda is zero.
model::TrainResult fine_tune(model::ToyModel start, const std::vector<PreparedSample>& source,
                             const std::vector<PreparedSample>& target,
                             const model::AtaConfig& cfg, const losses::LossConfig& loss_cfg);

struct StageSummary {
  int iters = 0;
  double task_src = 0.0;
  double task_tgt = 0.0;
  double domain_loss = 0.0;
  double domain_accuracy = 0.0;
};

struct AdaptResult {
  model::ToyModel pretrained;
  model::ToyModel final_model;
  StageSummary stage1, stage2;
  PseudoLabelBatch pseudo;
  std::vector<model::StepDiagnostics> curve_stage1, curve_stage2;
};

// pretrain -> generate pseudo-labels -> fine-tune. Deterministic under
// the seeds in the config bundle.
AdaptResult adapt(const DomainData& source, const DomainData& target, const AdaptConfig& cfg);

// ---- prediction + evaluation glue ---------------------------------------------------

// Boxes per image (sorted by descending confidence) for an image split.
std::vector<eval::ImageBoxes> predict_boxes(const model::ToyModel& m, const DomainData& data,
                                            double score_threshold, double min_box_area,
                                            int jobs = 1);

void write_predictions(const std::string& dir, const std::vector<eval::ImageBoxes>& preds);

// Reads every *.txt box file in a directory; the image id is the file
// stem with any "gt_" prefix stripped.
std::vector<eval::ImageBoxes> read_boxes_dir(const std::string& dir);

std::string config_hash(const AdaptConfig& cfg);

}  // namespace tad::pipeline
