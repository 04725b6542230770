// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tad::losses {

void LossConfig::validate() const {
  if (!(epsilon_log > 0.0 && epsilon_log <= 1e-3))
    throw std::invalid_argument("LossConfig: epsilon_log must be in (0, 1e-3]");
  if (beta_mode == BetaMode::Fixed && !(beta_fixed >= 0.0 && beta_fixed <= 1.0))
    throw std::invalid_argument("LossConfig: beta_fixed must be in [0,1]");
}

namespace {

void check_shapes(const ScoreMap& pred, const ScoreMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("score loss: prediction and ground truth shapes differ");
}

// shared core; `state` says how each pixel contributes
ScalarLoss score_loss_core(const ScoreMap& pred, const std::vector<uint8_t>& is_pos,
                           const std::vector<uint8_t>& is_neg, const LossConfig& cfg) {
  cfg.validate();
  const size_t n = pred.npixels();
  size_t n_pos = 0, n_neg = 0;
  for (size_t i = 0; i < n; ++i) {
    n_pos += is_pos[i];
    n_neg += is_neg[i];
  }

  double beta;
  if (cfg.beta_mode == BetaMode::Fixed) {
    beta = cfg.beta_fixed;
  } else {
    size_t considered = n_pos + n_neg;
    beta = considered == 0 ? 0.5 : 1.0 - double(n_pos) / double(considered);
  }

  ScalarLoss out;
  out.grad.assign(n, 0.0);
  const double eps = cfg.epsilon_log;
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double y = pred.data[i];
    if (is_pos[i]) {
      double clamped = std::max(y, eps);
      loss -= beta * std::log(clamped);
      out.grad[i] = y > eps ? -beta / y : 0.0;
    } else if (is_neg[i]) {
      if (cfg.literal_negative_term) loss -= (1.0 - beta) * (1.0 - y);
      else loss += (1.0 - beta) * y;
      out.grad[i] = 1.0 - beta;  // both forms differ by a constant only
    }
  }
  out.value = loss;
  return out;
}

}  // namespace

ScalarLoss balanced_score_loss(const ScoreMap& pred, const ScoreMap& gt,
                               const LossConfig& cfg) {
  check_shapes(pred, gt);
  const size_t n = pred.npixels();
  std::vector<uint8_t> is_pos(n), is_neg(n);
  for (size_t i = 0; i < n; ++i) {
    double g = gt.data[i];
    if (g != 0.0 && g != 1.0)
      throw std::invalid_argument("score loss: ground truth must be 0/1");
    is_pos[i] = g == 1.0;
    is_neg[i] = g == 0.0;
  }
  return score_loss_core(pred, is_pos, is_neg, cfg);
}

ScalarLoss weak_score_loss(const ScoreMap& pred, const ScoreMap& gt,
                           const PixelPartition& partition, const LossConfig& cfg) {
  check_shapes(pred, gt);
  if (partition.width != pred.width || partition.height != pred.height)
    throw std::invalid_argument("score loss: partition shape differs");
  const size_t n = pred.npixels();
  std::vector<uint8_t> is_pos(n), is_neg(n);
  for (size_t i = 0; i < n; ++i) {
    is_pos[i] = partition.state[i] == PixelState::Positive;
    is_neg[i] = partition.state[i] == PixelState::NegativeKept;
  }
  return score_loss_core(pred, is_pos, is_neg, cfg);
}

PixelPartition select_negatives(const ScoreMap& pred,
                                const std::vector<uint8_t>& candidate_negatives,
                                double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("select_negatives: eta must be in (0,1]");
  if (candidate_negatives.size() != pred.npixels())
    throw std::invalid_argument("select_negatives: mask size differs from prediction");

  PixelPartition part(pred.width, pred.height, PixelState::Positive);
  std::vector<size_t> cand;
  for (size_t i = 0; i < candidate_negatives.size(); ++i)
    if (candidate_negatives[i]) {
      part.state[i] = PixelState::Ignored;
      cand.push_back(i);
    }

  size_t k = size_t(std::floor(eta * double(cand.size())));
  if (k == 0) return part;

  // lowest predicted confidence first; ties toward the smaller index
  std::sort(cand.begin(), cand.end(), [&](size_t a, size_t b) {
    double ya = pred.data[a], yb = pred.data[b];
    return ya < yb || (ya == yb && a < b);
  });
  for (size_t j = 0; j < k; ++j) part.state[cand[j]] = PixelState::NegativeKept;
  return part;
}

ScalarLoss domain_loss(const std::vector<double>& prob, const std::vector<uint8_t>& label,
                       double eps) {
  if (prob.empty()) throw std::invalid_argument("domain_loss: empty batch");
  if (prob.size() != label.size())
    throw std::invalid_argument("domain_loss: probabilities and labels differ in length");

  const double inv_n = 1.0 / double(prob.size());
  ScalarLoss out;
  out.grad.assign(prob.size(), 0.0);
  double loss = 0.0;
  for (size_t i = 0; i < prob.size(); ++i) {
    double p = std::clamp(prob[i], eps, 1.0 - eps);
    if (label[i]) {
      loss -= std::log(p);
      if (prob[i] > eps && prob[i] < 1.0 - eps) out.grad[i] = -inv_n / p;
    } else {
      loss -= std::log(1.0 - p);
      if (prob[i] > eps && prob[i] < 1.0 - eps) out.grad[i] = inv_n / (1.0 - p);
    }
  }
  out.value = loss * inv_n;
  return out;
}

}  // namespace tad::losses
