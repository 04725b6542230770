// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "tad/types.hpp"

namespace tad::losses {

enum class BetaMode {
  PerImageBalanced,  // beta = 1 - |Pos| / (|Pos| + |Neg considered|)
  Fixed,
};

struct LossConfig {
  BetaMode beta_mode = BetaMode::PerImageBalanced;
  double beta_fixed = 0.5;
  double epsilon_log = 1e-6;  // clamp for log arguments, (0, 1e-3]
  // Audit mode: evaluate the raw linear background term -(1-beta)(1-y)
  // instead of the normalized (1-beta)*y. Both share one gradient (they
  // differ by a constant per background pixel); the raw form is unbounded
  // below and is never used for training.
  bool literal_negative_term = false;

  void validate() const;
};

struct ScalarLoss {
  double value = 0.0;
  std::vector<double> grad;  // d value / d prediction, same layout as the input
};

// Class-balanced per-pixel score loss over a 0/1 ground truth:
//   text pixels:        -beta * log(max(pred, eps))
//   background pixels:  (1-beta) * pred
// beta defaults to the per-image background fraction so sparse text is not
// swamped by background.
ScalarLoss balanced_score_loss(const ScoreMap& pred, const ScoreMap& gt,
                               const LossConfig& cfg);

// Same loss, but background pixels are read from the partition: only
// NegativeKept pixels contribute; Ignored pixels contribute zero loss and
// zero gradient. With every background pixel kept this equals
// balanced_score_loss bit-for-bit.
ScalarLoss weak_score_loss(const ScoreMap& pred, const ScoreMap& gt,
                           const PixelPartition& partition, const LossConfig& cfg);

// Keep the floor(eta * |candidates|) lowest-confidence candidate pixels
// as trusted negatives and ignore the rest (they may be unlabeled text).
// Non-candidate pixels become Positive. Ties break toward the smaller
// row-major pixel index.
PixelPartition select_negatives(const ScoreMap& pred,
                                const std::vector<uint8_t>& candidate_negatives,
                                double eta);

// Mean binary cross entropy over a batch of domain probabilities
// (label 0 = source, 1 = target). Probabilities are clamped to
// [eps, 1-eps] before the logs.
ScalarLoss domain_loss(const std::vector<double>& prob, const std::vector<uint8_t>& label,
                       double eps = 1e-12);

}  // namespace tad::losses
