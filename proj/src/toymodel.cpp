// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "tad/io.hpp"
#include "tad/kernels.hpp"
#include "tad/rng.hpp"

namespace tad::model {

namespace {

constexpr size_t kBackboneSize = size_t(kEmbed) * kFeatures + kEmbed;
constexpr size_t kHeadSize = size_t(kEmbed) + 1;
constexpr size_t kDomainSize = size_t(kHidden) * kEmbed + kHidden + kHidden + 1;

inline double squash1(double x) { return x / std::sqrt(1.0 + x * x); }
inline double squash1_grad(double x) {
  double t = 1.0 + x * x;
  return 1.0 / (t * std::sqrt(t));
}
inline double sigmoid1(double x) { return 0.5 + 0.5 * squash1(x); }
inline double sigmoid1_grad(double x) { return 0.5 * squash1_grad(x); }

}  // namespace

ToyModel ToyModel::zeros() {
  ToyModel m;
  m.backbone.assign(kBackboneSize, 0.0f);
  m.head.assign(kHeadSize, 0.0f);
  m.domain.assign(kDomainSize, 0.0f);
  return m;
}

ToyModel ToyModel::init(uint64_t seed) {
  Rng rng(derive_seed(seed, "model-init"));
  ToyModel m = zeros();
  for (float& p : m.backbone) p = float(rng.uniform(-0.3, 0.3));
  for (float& p : m.head) p = float(rng.uniform(-0.3, 0.3));
  for (float& p : m.domain) p = float(rng.uniform(-0.3, 0.3));
  return m;
}

bool ToyModel::finite() const {
  auto ok = [](const std::vector<float>& v) {
    for (float p : v)
      if (!std::isfinite(p)) return false;
    return true;
  };
  return ok(backbone) && ok(head) && ok(domain);
}

// ---- model file ---------------------------------------------------------------

namespace {
constexpr char kModelMagic[4] = {'T', 'A', 'D', 'M'};
constexpr uint8_t kModelVersion = 0x01;

void put_u32le(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}
uint32_t get_u32le(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(s[off + i])) << (8 * i);
  return v;
}
}  // namespace

void save_model(const ToyModel& m, const std::string& path) {
  if (!m.finite()) throw NumericError("save_model: non-finite parameters");
  std::string out(kModelMagic, 4);
  out.push_back(char(kModelVersion));
  put_u32le(out, uint32_t(m.backbone.size()));
  put_u32le(out, uint32_t(m.head.size()));
  put_u32le(out, uint32_t(m.domain.size()));
  auto put_block = [&](const std::vector<float>& v) {
    for (float f : v) {
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32le(out, bits);
    }
  };
  put_block(m.backbone);
  put_block(m.head);
  put_block(m.domain);
  io::write_file(path, out);
}

ToyModel load_model(const std::string& path) {
  std::string s = io::read_file(path);
  if (s.size() < 17) throw FormatError(path + ": truncated model header");
  if (std::memcmp(s.data(), kModelMagic, 4) != 0)
    throw FormatError(path + ": bad model magic");
  if (uint8_t(s[4]) != kModelVersion)
    throw FormatError(path + ": unsupported model version");
  size_t nb = get_u32le(s, 5), nh = get_u32le(s, 9), nd = get_u32le(s, 13);
  if (nb != kBackboneSize || nh != kHeadSize || nd != kDomainSize)
    throw FormatError(path + ": parameter counts do not match the architecture");
  size_t need = 17 + 4 * (nb + nh + nd);
  if (s.size() != need)
    throw FormatError(path + ": model payload size mismatch (expected " +
                      std::to_string(need) + " bytes, got " + std::to_string(s.size()) + ")");
  ToyModel m;
  size_t off = 17;
  auto get_block = [&](std::vector<float>& v, size_t n) {
    v.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t bits = get_u32le(s, off);
      std::memcpy(&v[i], &bits, 4);
      off += 4;
    }
  };
  get_block(m.backbone, nb);
  get_block(m.head, nh);
  get_block(m.domain, nd);
  if (!m.finite()) throw FormatError(path + ": non-finite parameters in model file");
  return m;
}

// ---- features ----------------------------------------------------------------

FeatureRaster extract_features(const GrayImage& image) {
  const int w = image.width, h = image.height;
  const size_t n = image.npixels();
  FeatureRaster f;
  f.width = w;
  f.height = h;
  f.planes.assign(size_t(kFeatures) * n, 0.0);

  auto fetch = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return image.at(x, y);
  };

  double* intensity = f.plane(0);
  double* local_mean = f.plane(1);
  double* local_std = f.plane(2);
  double* grad_mag = f.plane(3);
  double* laplace = f.plane(4);

  constexpr double inv_2sqrt2 = 0.35355339059327376220;  // 1/(2*sqrt(2))
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = size_t(y) * w + x;
      double c = image.at(x, y);
      intensity[i] = 2.0 * c - 1.0;

      double sum = 0.0, sq = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          double v = fetch(x + dx, y + dy);
          sum += v;
          sq += v * v;
        }
      double mean = sum / 9.0;
      double var = std::max(0.0, sq / 9.0 - mean * mean);
      local_mean[i] = 2.0 * mean - 1.0;
      local_std[i] = 2.0 * std::sqrt(var);  // [0,1]: zero on flat patches

      double sx = (fetch(x + 1, y - 1) + 2.0 * fetch(x + 1, y) + fetch(x + 1, y + 1)) -
                  (fetch(x - 1, y - 1) + 2.0 * fetch(x - 1, y) + fetch(x - 1, y + 1));
      double sy = (fetch(x - 1, y + 1) + 2.0 * fetch(x, y + 1) + fetch(x + 1, y + 1)) -
                  (fetch(x - 1, y - 1) + 2.0 * fetch(x, y - 1) + fetch(x + 1, y - 1));
      grad_mag[i] = std::hypot(sx, sy) * 0.5 * inv_2sqrt2;  // [0,1]: zero on flat patches

      laplace[i] = (fetch(x + 1, y) + fetch(x - 1, y) + fetch(x, y + 1) + fetch(x, y - 1) -
                    4.0 * c) / 4.0;
    }
  }
  return f;
}

// ---- forward -------------------------------------------------------------------

void forward(const ToyModel& m, const FeatureRaster& f, Forward& out,
             const std::vector<uint8_t>* fixed_pool_mask) {
  const size_t n = f.npixels();
  const auto& K = kernels::ops();

  out.pre.assign(size_t(kEmbed) * n, 0.0);
  out.emb.resize(size_t(kEmbed) * n);
  out.qgrad.resize(size_t(kEmbed) * n);
  out.z.assign(n, 0.0);
  out.sgrad.resize(n);
  out.scores.width = f.width;
  out.scores.height = f.height;
  out.scores.data.resize(n);

  for (int j = 0; j < kEmbed; ++j) {
    double* pre = out.pre.data() + size_t(j) * n;
    double bias = m.backbone[size_t(kEmbed) * kFeatures + j];
    for (size_t i = 0; i < n; ++i) pre[i] = bias;
    for (int c = 0; c < kFeatures; ++c)
      K.axpy(double(m.backbone[size_t(j) * kFeatures + c]), f.plane(c), pre, n);
    K.squash(pre, out.emb.data() + size_t(j) * n, n);
    K.squash_grad(pre, out.qgrad.data() + size_t(j) * n, n);
  }

  double head_bias = m.head[kEmbed];
  for (size_t i = 0; i < n; ++i) out.z[i] = head_bias;
  for (int j = 0; j < kEmbed; ++j)
    K.axpy(double(m.head[j]), out.emb.data() + size_t(j) * n, out.z.data(), n);
  K.sigmoid(out.z.data(), out.scores.data.data(), n);
  K.sigmoid_grad(out.z.data(), out.sgrad.data(), n);

  // pooling gate
  if (fixed_pool_mask) {
    out.pool_mask = *fixed_pool_mask;
  } else {
    out.pool_mask.assign(n, 0);
    size_t cnt = 0;
    for (size_t i = 0; i < n; ++i)
      if (out.scores.data[i] > 0.5) {
        out.pool_mask[i] = 1;
        ++cnt;
      }
    if (cnt == 0) out.pool_mask.assign(n, 1);
  }
  out.pool_count = 0;
  for (uint8_t b : out.pool_mask) out.pool_count += b;
  if (out.pool_count == 0) {  // degenerate fixed mask
    out.pool_mask.assign(n, 1);
    out.pool_count = n;
  }

  for (int j = 0; j < kEmbed; ++j) {
    const double* emb = out.emb.data() + size_t(j) * n;
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (out.pool_mask[i]) acc += emb[i];
    out.pooled[j] = acc / double(out.pool_count);
  }

  // domain classifier on the pooled embedding
  const float* w1 = m.domain.data();
  const float* b1 = m.domain.data() + size_t(kHidden) * kEmbed;
  const float* w2 = b1 + kHidden;
  const double b2 = double(w2[kHidden]);
  for (int t = 0; t < kHidden; ++t) {
    double acc = double(b1[t]);
    for (int j = 0; j < kEmbed; ++j) acc += double(w1[size_t(t) * kEmbed + j]) * out.pooled[j];
    out.dom_pre[t] = acc;
    out.dom_act[t] = squash1(acc);
  }
  double v = b2;
  for (int t = 0; t < kHidden; ++t) v += double(w2[t]) * out.dom_act[t];
  out.dom_z = v;
  out.domain_prob = sigmoid1(v);
}

std::vector<double> grl_backward(const std::vector<double>& upstream, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("grl_backward: lambda must be >= 0");
  std::vector<double> down(upstream.size());
  for (size_t i = 0; i < upstream.size(); ++i) down[i] = -lambda * upstream[i];
  return down;
}

// ---- gradients -----------------------------------------------------------------

void AtaConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("AtaConfig: lambda must be >= 0");
  if (batch_source < 1 || batch_target < 1)
    throw std::invalid_argument("AtaConfig: batch sizes must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("AtaConfig: lr must be positive");
  if (iters < 0) throw std::invalid_argument("AtaConfig: iters must be >= 0");
  if (!(domain_lr_scale > 0.0))
    throw std::invalid_argument("AtaConfig: domain_lr_scale must be positive");
}

namespace {

struct BatchPass {
  StepGrads grads;
  double task_total = 0.0;    // sum of per-pixel-mean task losses / n_task
  double domain_total = 0.0;  // batch-mean domain loss
};

// Single pass over the batch producing gradients and the two scalar
// objectives; the spine of both train_step and the objective evaluator.
BatchPass run_batch(const ToyModel& mdl, std::span<const Sample> batch, const AtaConfig& cfg,
                    const losses::LossConfig& loss_cfg,
                    const std::vector<std::vector<uint8_t>>* fixed_masks, bool domain_branch,
                    bool want_grads,
                    const std::vector<std::array<double, kEmbed>>* domain_noise) {
  const auto& K = kernels::ops();
  BatchPass out;
  StepGrads& g = out.grads;
  g.backbone.assign(kBackboneSize, 0.0);
  g.head.assign(kHeadSize, 0.0);
  g.domain.assign(kDomainSize, 0.0);
  g.pool_masks.resize(batch.size());

  size_t n_task = 0;
  for (const Sample& s : batch)
    if (s.gt) ++n_task;

  const double inv_batch = 1.0 / double(batch.size());
  constexpr double kProbEps = 1e-12;

  Forward fwd;
  std::vector<double> gz, ge, maskd;
  double task_src_sum = 0.0, task_tgt_sum = 0.0;
  size_t n_src = 0, n_tgt = 0;
  double dom_sum = 0.0;
  double dom_correct = 0.0;

  for (size_t bi = 0; bi < batch.size(); ++bi) {
    const Sample& s = batch[bi];
    const size_t n = s.features->npixels();
    const std::vector<uint8_t>* fixed =
        fixed_masks ? &(*fixed_masks)[bi] : nullptr;
    forward(mdl, *s.features, fwd, fixed);
    g.pool_masks[bi] = fwd.pool_mask;

    // ---- task loss (per-pixel mean, averaged over task-bearing samples)
    losses::ScalarLoss task;
    bool has_task = s.gt != nullptr;
    if (has_task) {
      task = s.partition
                 ? losses::weak_score_loss(fwd.scores, *s.gt, *s.partition, loss_cfg)
                 : losses::balanced_score_loss(fwd.scores, *s.gt, loss_cfg);
      double per_pixel = task.value / double(n);
      out.task_total += per_pixel / double(n_task);
      if (s.domain_label == 0) {
        task_src_sum += per_pixel;
        ++n_src;
      } else {
        task_tgt_sum += per_pixel;
        ++n_tgt;
      }
    }

    // ---- domain path on the (optionally noised) pooled embedding,
    //      batch-mean loss with smoothed labels
    double dldp = 0.0;
    bool has_domain = domain_branch;
    std::array<double, kEmbed> pooled_in = fwd.pooled;
    std::array<double, kHidden> dom_pre{}, dom_act{};
    double dom_z = 0.0, dom_prob = 0.5;
    if (has_domain) {
      if (domain_noise)
        for (int j = 0; j < kEmbed; ++j) pooled_in[j] += (*domain_noise)[bi][j];
      const float* w1 = mdl.domain.data();
      const float* b1 = mdl.domain.data() + size_t(kHidden) * kEmbed;
      const float* w2 = b1 + kHidden;
      for (int t = 0; t < kHidden; ++t) {
        double acc = double(b1[t]);
        for (int j = 0; j < kEmbed; ++j) acc += double(w1[size_t(t) * kEmbed + j]) * pooled_in[j];
        dom_pre[t] = acc;
        dom_act[t] = squash1(acc);
      }
      dom_z = double(w2[kHidden]);
      for (int t = 0; t < kHidden; ++t) dom_z += double(w2[t]) * dom_act[t];
      dom_prob = sigmoid1(dom_z);

      double p = std::clamp(dom_prob, kProbEps, 1.0 - kProbEps);
      double y = s.domain_label ? 1.0 - cfg.domain_label_smoothing
                                : cfg.domain_label_smoothing;
      dom_sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv_batch;
      dom_correct += ((dom_prob > 0.5) == (s.domain_label != 0)) ? 1.0 : 0.0;
      if (dom_prob > kProbEps && dom_prob < 1.0 - kProbEps)
        dldp = inv_batch * (-y / p + (1.0 - y) / (1.0 - p));
    }

    if (!want_grads) continue;

    // ---- head + backbone task path
    gz.assign(n, 0.0);
    if (has_task) {
      const double task_scale = 1.0 / (double(n_task) * double(n));
      // gz = task.grad * task_scale * sigmoid'(z)
      K.mul(task.grad.data(), fwd.sgrad.data(), gz.data(), n);
      K.scale(task_scale, gz.data(), n);
      for (int j = 0; j < kEmbed; ++j)
        g.head[j] += K.dot(gz.data(), fwd.emb.data() + size_t(j) * n, n);
      g.head[kEmbed] += K.sum(gz.data(), n);
    }

    // ---- domain classifier backward + reversed path into the backbone
    std::array<double, kEmbed> dpooled{};
    bool domain_into_backbone = false;
    if (has_domain && dldp != 0.0) {
      const float* w1 = mdl.domain.data();
      const float* w2 = mdl.domain.data() + size_t(kHidden) * kEmbed + kHidden;
      double dv = dldp * sigmoid1_grad(dom_z);
      double* gW1 = g.domain.data();
      double* gb1 = g.domain.data() + size_t(kHidden) * kEmbed;
      double* gw2 = gb1 + kHidden;
      for (int t = 0; t < kHidden; ++t) {
        gw2[t] += dv * dom_act[t];
        double du = dv * double(w2[t]) * squash1_grad(dom_pre[t]);
        gb1[t] += du;
        for (int j = 0; j < kEmbed; ++j) {
          gW1[size_t(t) * kEmbed + j] += du * pooled_in[j];
          dpooled[j] += du * double(w1[size_t(t) * kEmbed + j]);
        }
      }
      gw2[kHidden] += dv;  // b2
      // gradient reversal happens where the pooled embedding leaves the
      // backbone; skipped entirely at lambda == 0 so that run matches a
      // domain-branch-free run bit for bit
      if (cfg.lambda != 0.0) domain_into_backbone = true;
    }

    if (has_task || domain_into_backbone) {
      if (domain_into_backbone) {
        maskd.resize(n);
        for (size_t i = 0; i < n; ++i) maskd[i] = fwd.pool_mask[i] ? 1.0 : 0.0;
      }
      ge.resize(n);
      const double inv_cnt = 1.0 / double(fwd.pool_count);
      for (int j = 0; j < kEmbed; ++j) {
        std::fill(ge.begin(), ge.end(), 0.0);
        if (has_task) K.axpy(double(mdl.head[j]), gz.data(), ge.data(), n);
        if (domain_into_backbone)
          K.axpy(-cfg.lambda * dpooled[j] * inv_cnt, maskd.data(), ge.data(), n);
        // through the squash: gpre = ge * squash'(pre), reusing ge
        K.mul(ge.data(), fwd.qgrad.data() + size_t(j) * n, ge.data(), n);
        for (int c = 0; c < kFeatures; ++c)
          g.backbone[size_t(j) * kFeatures + c] += K.dot(ge.data(), s.features->plane(c), n);
        g.backbone[size_t(kEmbed) * kFeatures + j] += K.sum(ge.data(), n);
      }
    }
  }

  out.domain_total = dom_sum;
  g.task_src = n_src ? task_src_sum / double(n_src) : std::nan("");
  g.task_tgt = n_tgt ? task_tgt_sum / double(n_tgt) : std::nan("");
  g.domain_loss_value = domain_branch ? dom_sum : std::nan("");
  g.domain_accuracy = domain_branch ? dom_correct / double(batch.size()) : std::nan("");
  return out;
}

}  // namespace

StepGrads compute_step_gradients(const ToyModel& m, std::span<const Sample> batch,
                                 const AtaConfig& cfg, const losses::LossConfig& loss_cfg,
                                 const std::vector<std::vector<uint8_t>>* fixed_masks,
                                 bool domain_branch,
                                 const std::vector<std::array<double, kEmbed>>* domain_noise) {
  if (batch.empty()) throw std::invalid_argument("compute_step_gradients: empty batch");
  cfg.validate();
  return run_batch(m, batch, cfg, loss_cfg, fixed_masks, domain_branch, true, domain_noise)
      .grads;
}

double routed_objective(const ToyModel& m, std::span<const Sample> batch, ParamSpace space,
                        const AtaConfig& cfg, const losses::LossConfig& loss_cfg,
                        const std::vector<std::vector<uint8_t>>& masks, bool domain_branch,
                        const std::vector<std::array<double, kEmbed>>* domain_noise) {
  BatchPass pass = run_batch(m, batch, cfg, loss_cfg, &masks, domain_branch, false, domain_noise);
  switch (space) {
    case ParamSpace::Backbone: return pass.task_total - cfg.lambda * pass.domain_total;
    case ParamSpace::Head: return pass.task_total;
    case ParamSpace::Domain: return pass.domain_total;
  }
  return 0.0;
}

// ---- optimizer -----------------------------------------------------------------

AdamState AdamState::for_model(const ToyModel& m) {
  AdamState s;
  s.m_backbone.assign(m.backbone.size(), 0.0);
  s.v_backbone.assign(m.backbone.size(), 0.0);
  s.m_head.assign(m.head.size(), 0.0);
  s.v_head.assign(m.head.size(), 0.0);
  s.m_domain.assign(m.domain.size(), 0.0);
  s.v_domain.assign(m.domain.size(), 0.0);
  return s;
}

void adam_update(std::vector<float>& params, std::vector<double>& m, std::vector<double>& v,
                 const std::vector<double>& grad, int64_t t, const AtaConfig& cfg) {
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, double(t));
  const double bc2 = 1.0 - std::pow(b2, double(t));
  for (size_t i = 0; i < params.size(); ++i) {
    double gi = grad[i];
    m[i] = b1 * m[i] + (1.0 - b1) * gi;
    v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    params[i] = float(double(params[i]) - cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
  }
}

std::string diagnostics_csv_header() { return "iter,L_task_src,L_task_tgt,L_d,domain_acc"; }

std::string diagnostics_csv_line(const StepDiagnostics& d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g", d.iter, d.task_src, d.task_tgt,
                d.domain_loss, d.domain_accuracy);
  return buf;
}

StepDiagnostics train_step(ToyModel& m, std::span<const Sample> batch, const AtaConfig& cfg,
                           const losses::LossConfig& loss_cfg, AdamState& adam, int iter,
                           bool domain_branch) {
  // per-step instance noise for the classifier input; a dedicated stream
  // keeps batch sampling untouched
  std::vector<std::array<double, kEmbed>> noise;
  const std::vector<std::array<double, kEmbed>>* noise_ptr = nullptr;
  if (domain_branch && cfg.domain_input_noise > 0.0) {
    Rng nrng(derive_seed(cfg.seed, 0xd01fe000ull + uint64_t(iter)));
    noise.resize(batch.size());
    for (auto& eps : noise)
      for (double& v : eps) v = nrng.normal(0.0, cfg.domain_input_noise);
    noise_ptr = &noise;
  }
  StepGrads g = compute_step_gradients(m, batch, cfg, loss_cfg, nullptr, domain_branch,
                                       noise_ptr);

  // NaN marks "absent" in the diagnostics; infinities are genuine failures
  auto bad = [](double x) { return !std::isnan(x) && !std::isfinite(x); };
  if (bad(g.task_src) || bad(g.task_tgt) || bad(g.domain_loss_value))
    throw NumericError("train_step: non-finite loss at step " + std::to_string(iter));

  ++adam.t;
  adam_update(m.backbone, adam.m_backbone, adam.v_backbone, g.backbone, adam.t, cfg);
  if (cfg.backbone_weight_decay > 0.0) {
    const double decay = 1.0 - cfg.lr * cfg.backbone_weight_decay;
    for (float& p : m.backbone) p = float(double(p) * decay);
  }
  adam_update(m.head, adam.m_head, adam.v_head, g.head, adam.t, cfg);
  if (domain_branch) {
    AtaConfig dom_cfg = cfg;
    dom_cfg.lr = cfg.lr * cfg.domain_lr_scale;
    adam_update(m.domain, adam.m_domain, adam.v_domain, g.domain, adam.t, dom_cfg);
    if (cfg.domain_weight_decay > 0.0) {
      const double decay = 1.0 - dom_cfg.lr * cfg.domain_weight_decay;
      for (float& p : m.domain) p = float(double(p) * decay);
    }
  }

  if (!m.finite())
    throw NumericError("train_step: non-finite parameters after step " + std::to_string(iter));

  StepDiagnostics d;
  d.iter = iter;
  d.task_src = g.task_src;
  d.task_tgt = g.task_tgt;
  d.domain_loss = g.domain_loss_value;
  d.domain_accuracy = g.domain_accuracy;
  return d;
}

// ---- training loops --------------------------------------------------------------

namespace {

TrainResult train_loop(ToyModel model, std::span<const Sample> source,
                       std::span<const Sample> target, const AtaConfig& cfg,
                       const losses::LossConfig& loss_cfg, std::string_view stream_tag,
                       bool domain_branch) {
  cfg.validate();
  if (source.empty() || target.empty())
    throw std::invalid_argument("training: both domains need at least one sample");

  Rng rng(derive_seed(cfg.seed, stream_tag));
  AdamState adam = AdamState::for_model(model);
  TrainResult result;
  result.curve.reserve(cfg.iters);

  std::vector<Sample> batch;
  for (int it = 0; it < cfg.iters; ++it) {
    if (domain_branch && cfg.domain_refresh_every > 0 && it > 0 &&
        it % cfg.domain_refresh_every == 0) {
      Rng refresh(derive_seed(cfg.seed, 0xd0313 + uint64_t(it)));
      for (float& p : model.domain) p = float(refresh.uniform(-0.3, 0.3));
      std::fill(adam.m_domain.begin(), adam.m_domain.end(), 0.0);
      std::fill(adam.v_domain.begin(), adam.v_domain.end(), 0.0);
    }
    batch.clear();
    for (int b = 0; b < cfg.batch_source; ++b)
      batch.push_back(source[size_t(rng.uniform_int(0, int(source.size()) - 1))]);
    for (int b = 0; b < cfg.batch_target; ++b)
      batch.push_back(target[size_t(rng.uniform_int(0, int(target.size()) - 1))]);
    result.curve.push_back(
        train_step(model, batch, cfg, loss_cfg, adam, it, domain_branch));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult pretrain(std::span<const Sample> source, std::span<const Sample> target,
                     const AtaConfig& cfg, const losses::LossConfig& loss_cfg,
                     bool domain_branch) {
  return train_loop(ToyModel::init(cfg.seed), source, target, cfg, loss_cfg,
                    "batch-pretrain", domain_branch);
}

TrainResult continue_training(ToyModel start, std::span<const Sample> source,
                              std::span<const Sample> target, const AtaConfig& cfg,
                              const losses::LossConfig& loss_cfg, std::string_view stream_tag,
                              bool domain_branch) {
  return train_loop(std::move(start), source, target, cfg, loss_cfg, stream_tag,
                    domain_branch);
}

ScoreMap predict_scoremap(const ToyModel& m, const GrayImage& image) {
  FeatureRaster f = extract_features(image);
  Forward fwd;
  forward(m, f, fwd);
  return std::move(fwd.scores);
}

// ---- probe -----------------------------------------------------------------------

ProbeResult fit_logistic_probe(const std::vector<std::vector<double>>& x_train,
                               const std::vector<uint8_t>& y_train,
                               const std::vector<std::vector<double>>& x_test,
                               const std::vector<uint8_t>& y_test, int iters, double lr,
                               bool normalize) {
  if (x_train.empty() || x_train.size() != y_train.size())
    throw std::invalid_argument("fit_logistic_probe: bad training set");
  const size_t dim = x_train[0].size();

  // optional z-scoring with training statistics
  std::vector<double> mu(dim, 0.0), sd(dim, 1.0);
  if (normalize) {
    std::fill(sd.begin(), sd.end(), 0.0);
    for (const auto& x : x_train)
      for (size_t j = 0; j < dim; ++j) mu[j] += x[j];
    for (double& v : mu) v /= double(x_train.size());
    for (const auto& x : x_train)
      for (size_t j = 0; j < dim; ++j) sd[j] += (x[j] - mu[j]) * (x[j] - mu[j]);
    for (double& v : sd) v = std::max(std::sqrt(v / double(x_train.size())), 1e-9);
  }

  auto normalized = [&](const std::vector<double>& x, size_t j) {
    return (x[j] - mu[j]) / sd[j];
  };

  std::vector<double> w(dim + 1, 0.0);  // last entry is the bias
  const double inv_n = 1.0 / double(x_train.size());
  std::vector<double> grad(dim + 1);
  for (int it = 0; it < iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t i = 0; i < x_train.size(); ++i) {
      double z = w[dim];
      for (size_t j = 0; j < dim; ++j) z += w[j] * normalized(x_train[i], j);
      double p = 1.0 / (1.0 + std::exp(-z));
      double d = (p - double(y_train[i])) * inv_n;
      for (size_t j = 0; j < dim; ++j) grad[j] += d * normalized(x_train[i], j);
      grad[dim] += d;
    }
    for (size_t j = 0; j <= dim; ++j) w[j] -= lr * grad[j];
  }

  auto accuracy = [&](const std::vector<std::vector<double>>& xs,
                      const std::vector<uint8_t>& ys) {
    if (xs.empty()) return 0.0;
    size_t correct = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      double z = w[dim];
      for (size_t j = 0; j < dim; ++j) z += w[j] * normalized(xs[i], j);
      correct += ((z > 0.0) == (ys[i] != 0));
    }
    return double(correct) / double(xs.size());
  };

  ProbeResult r;
  r.train_accuracy = accuracy(x_train, y_train);
  r.test_accuracy = accuracy(x_test, y_test);
  r.weights = std::move(w);
  return r;
}

}  // namespace tad::model
