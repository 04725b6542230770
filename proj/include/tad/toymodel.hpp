// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tad/losses.hpp"
#include "tad/types.hpp"

namespace tad::model {

// Fixed desk-scale architecture.
inline constexpr int kFeatures = 5;  // handcrafted per-pixel features
inline constexpr int kEmbed = 8;     // backbone embedding width
inline constexpr int kHidden = 16;   // domain classifier hidden units

// Three independently optimized parameter spaces:
//   backbone: per-pixel linear map + bias into the embedding, squash nonlinearity
//   head:     linear + sigmoid producing the per-pixel text score
//   domain:   two-layer perceptron on the pooled embedding -> domain probability
// Parameters are stored as f32 (the model file payload type); all math
// promotes to double.
struct ToyModel {
  std::vector<float> backbone;  // kEmbed*kFeatures weights, then kEmbed biases
  std::vector<float> head;      // kEmbed weights, then bias
  std::vector<float> domain;    // kHidden*kEmbed, kHidden bias, kHidden, 1 bias

  static ToyModel zeros();
  static ToyModel init(uint64_t seed);  // small uniform init, all three spaces
  bool finite() const;
};

// Model file: magic "TADM", version 0x01, three u32 LE parameter counts
// (backbone, head, domain), then the three f32 LE blocks in that order.
// load(save(m)) reproduces every parameter bit-exactly.
void save_model(const ToyModel& m, const std::string& path);
ToyModel load_model(const std::string& path);

// Handcrafted per-pixel features, plane-major, each channel affinely
// normalized into [-1,1] with fixed constants:
//   0: intensity              2*v - 1        [-1,1]
//   1: 3x3 local mean         2*m - 1        [-1,1]
//   2: 3x3 local std          2*s            [0,1]  (max population std of [0,1] data is 0.5)
//   3: Sobel magnitude        mag/(4*sqrt(2))  [0,1]  (max magnitude is 4*sqrt(2))
//   4: 4-neighbour Laplacian  lap / 4        [-1,1]
// Channels 2-4 are zero on flat patches. Borders replicate.
struct FeatureRaster {
  int width = 0;
  int height = 0;
  std::vector<double> planes;  // kFeatures * width*height

  size_t npixels() const { return size_t(width) * size_t(height); }
  const double* plane(int c) const { return planes.data() + size_t(c) * npixels(); }
  double* plane(int c) { return planes.data() + size_t(c) * npixels(); }
};

FeatureRaster extract_features(const GrayImage& image);

// Full forward state, kept for the handwritten backward pass.
struct Forward {
  ScoreMap scores;
  std::vector<double> pre;    // kEmbed planes, pre-activation
  std::vector<double> emb;    // kEmbed planes, squash(pre)
  std::vector<double> qgrad;  // kEmbed planes, squash'(pre)
  std::vector<double> z;      // head pre-activation plane
  std::vector<double> sgrad;  // sigmoid'(z) plane
  std::vector<uint8_t> pool_mask;
  size_t pool_count = 0;
  std::array<double, kEmbed> pooled{};
  std::array<double, kHidden> dom_pre{};
  std::array<double, kHidden> dom_act{};
  double dom_z = 0.0;
  double domain_prob = 0.5;
};

// The embedding is pooled over pixels scoring above 0.5 when any exist
// (a cheap stand-in for instance features), otherwise over all pixels.
// The gate is treated as a constant within a step; pass fixed_pool_mask
// to evaluate the step objective at a frozen gate.
void forward(const ToyModel& m, const FeatureRaster& f, Forward& out,
             const std::vector<uint8_t>* fixed_pool_mask = nullptr);

// Gradient reversal: identity forward; backward multiplies by -lambda.
std::vector<double> grl_backward(const std::vector<double>& upstream, double lambda);

struct AtaConfig {
  double lambda = 0.2;  // domain-confusion tradeoff
  double lr = 1e-2;
  int iters = 2000;
  int batch_source = 6;
  int batch_target = 6;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Minimax stabilizers. A confidently-correct domain classifier emits no
  // gradient in either direction, which parks training in the separated
  // basin; these keep the game live long enough for features to merge.
  double domain_lr_scale = 1.0;        // classifier speed relative to the backbone
  double domain_label_smoothing = 0.1; // classifier optimum stays off the saturation rail
  double domain_weight_decay = 1e-3;   // bounds attainable classifier confidence
  // Re-initialize the domain classifier every N steps (0 = never). Each
  // fresh opponent re-finds whatever domain direction is left and the
  // reversed gradient erodes it during the refit; one stale opponent
  // instead gets its decision boundary flipped around forever.
  int domain_refresh_every = 100;
  // Gaussian noise added to the classifier's pooled input during training
  // (instance noise). The classifier can only exploit domain gaps above
  // the noise floor, so the reversed pressure covers a band of directions
  // instead of a knife edge.
  double domain_input_noise = 0.1;
  // Keeps the embedding out of full saturation, where per-image variance
  // collapses and microscopic domain offsets survive any confusion; also
  // the main guard against overfitting source appearance at desk scale.
  double backbone_weight_decay = 0.2;

  void validate() const;
};

// One training sample; non-owning. gt == nullptr means no task loss
// (unlabeled). partition != nullptr switches the task loss to the weak
// variant over the stored negative selection.
struct Sample {
  const FeatureRaster* features = nullptr;
  const ScoreMap* gt = nullptr;
  const PixelPartition* partition = nullptr;
  uint8_t domain_label = 0;  // 0 source, 1 target
};

struct StepGrads {
  std::vector<double> backbone, head, domain;
  double task_src = 0.0, task_tgt = 0.0;  // per-pixel means; NaN when absent
  double domain_loss_value = 0.0;
  double domain_accuracy = 0.0;
  std::vector<std::vector<uint8_t>> pool_masks;  // per batch sample
};

// Gradient routing: head gets the task loss; domain gets the domain loss;
// backbone gets the task loss plus the reversed (-lambda) domain loss.
// Task losses are per-pixel means averaged over the task-bearing samples;
// the domain loss is the batch mean, evaluated on the pooled embedding
// plus the given per-sample instance noise. domain_branch=false removes
// the domain classifier entirely (it neither trains nor touches the
// backbone).
StepGrads compute_step_gradients(
    const ToyModel& m, std::span<const Sample> batch, const AtaConfig& cfg,
    const losses::LossConfig& loss_cfg,
    const std::vector<std::vector<uint8_t>>* fixed_masks = nullptr, bool domain_branch = true,
    const std::vector<std::array<double, kEmbed>>* domain_noise = nullptr);

enum class ParamSpace { Backbone, Head, Domain };

// Scalar objective whose gradient with respect to the given space is what
// compute_step_gradients produces (pool gates frozen to `masks`, same
// instance noise).
double routed_objective(const ToyModel& m, std::span<const Sample> batch, ParamSpace space,
                        const AtaConfig& cfg, const losses::LossConfig& loss_cfg,
                        const std::vector<std::vector<uint8_t>>& masks,
                        bool domain_branch = true,
                        const std::vector<std::array<double, kEmbed>>* domain_noise = nullptr);

struct AdamState {
  int64_t t = 0;
  std::vector<double> m_backbone, v_backbone, m_head, v_head, m_domain, v_domain;

  static AdamState for_model(const ToyModel& m);
};

// Standard bias-corrected Adam on one parameter vector.
void adam_update(std::vector<float>& params, std::vector<double>& m, std::vector<double>& v,
                 const std::vector<double>& grad, int64_t t, const AtaConfig& cfg);

struct StepDiagnostics {
  int iter = 0;
  double task_src = 0.0;
  double task_tgt = 0.0;
  double domain_loss = 0.0;
  double domain_accuracy = 0.0;
};

// CSV schema: "iter,L_task_src,L_task_tgt,L_d,domain_acc"
std::string diagnostics_csv_header();
std::string diagnostics_csv_line(const StepDiagnostics& d);

// One optimizer step over the batch. Throws NumericError (with the step
// index) if any loss is non-finite.
StepDiagnostics train_step(ToyModel& m, std::span<const Sample> batch, const AtaConfig& cfg,
                           const losses::LossConfig& loss_cfg, AdamState& adam, int iter,
                           bool domain_branch = true);

struct TrainResult {
  ToyModel model;
  std::vector<StepDiagnostics> curve;
};

// Stage-1 training: fresh model, source task loss + domain confusion;
// target samples are unlabeled (domain loss only).
TrainResult pretrain(std::span<const Sample> source, std::span<const Sample> target,
                     const AtaConfig& cfg, const losses::LossConfig& loss_cfg,
                     bool domain_branch = true);

// Shared batch loop continuing from an existing model (used by fine-tuning).
// stream_tag decorrelates the batch RNG between stages.
TrainResult continue_training(ToyModel start, std::span<const Sample> source,
                              std::span<const Sample> target, const AtaConfig& cfg,
                              const losses::LossConfig& loss_cfg, std::string_view stream_tag,
                              bool domain_branch = true);

ScoreMap predict_scoremap(const ToyModel& m, const GrayImage& image);

// Deterministic logistic-regression probe (full-batch gradient steps).
// Used to measure how separable two domains are in a frozen feature
// space. `normalize` z-scores the inputs first; leave it off to probe the
// raw features exactly as a downstream linear layer would see them.
struct ProbeResult {
  std::vector<double> weights;  // kDim + bias
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

ProbeResult fit_logistic_probe(const std::vector<std::vector<double>>& x_train,
                               const std::vector<uint8_t>& y_train,
                               const std::vector<std::vector<double>>& x_test,
                               const std::vector<uint8_t>& y_test, int iters = 500,
                               double lr = 0.5, bool normalize = true);

}  // namespace tad::model
