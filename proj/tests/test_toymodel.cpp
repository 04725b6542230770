// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "tad/io.hpp"
#include "tad/rng.hpp"
#include "tad/toymodel.hpp"
#include "testutil.hpp"

using namespace tad;
using namespace tad::model;
using tadtest::rel_l2_error;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

GrayImage shifted(const GrayImage& img, int dx, int dy) {
  GrayImage out(img.width, img.height, 0.5);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int sx = x - dx, sy = y - dy;
      if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height)
        out.at(x, y) = img.at(sx, sy);
    }
  return out;
}

struct MicroBatch {
  std::vector<FeatureRaster> features;
  std::vector<ScoreMap> gts;
  std::vector<PixelPartition> parts;
  std::vector<Sample> samples;
};

// two labeled source images + two target images (one pseudo-labeled)
MicroBatch make_micro_batch(uint64_t seed, int w = 7, int h = 6, bool target_labels = false) {
  Rng rng(seed);
  MicroBatch b;
  b.features.reserve(4);
  b.gts.reserve(4);
  b.parts.reserve(4);
  for (int i = 0; i < 4; ++i) {
    b.features.push_back(extract_features(tadtest::random_image(rng, w, h)));
    b.gts.push_back(tadtest::random_binary(rng, w, h, 0.3));
    PixelPartition part(w, h);
    for (size_t k = 0; k < b.gts.back().data.size(); ++k) {
      if (b.gts.back().data[k] == 1.0) part.state[k] = PixelState::Positive;
      else part.state[k] = rng.coin(0.5) ? PixelState::NegativeKept : PixelState::Ignored;
    }
    b.parts.push_back(std::move(part));
  }
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.features = &b.features[i];
    s.domain_label = i >= 2;
    if (i < 2) {
      s.gt = &b.gts[i];
    } else if (target_labels) {
      s.gt = &b.gts[i];
      s.partition = &b.parts[i];
    }
    b.samples.push_back(s);
  }
  return b;
}

}  // namespace

TEST_CASE("features: constant image zeroes the contrast channels") {
  GrayImage img(9, 7, 0.42);
  FeatureRaster f = extract_features(img);
  for (size_t i = 0; i < f.npixels(); ++i) {
    CHECK(f.plane(2)[i] == 0.0);  // local std
    CHECK(f.plane(3)[i] == 0.0);  // gradient magnitude
    CHECK(f.plane(4)[i] == 0.0);  // laplacian
    CHECK(f.plane(0)[i] == doctest::Approx(2.0 * 0.42 - 1.0));
  }
}

TEST_CASE("features stay finite and inside [-1,1] on random images") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img = tadtest::random_image(rng, 13, 11);
    FeatureRaster f = extract_features(img);
    for (double v : f.planes) {
      CHECK(std::isfinite(v));
      CHECK(v >= -1.0 - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("features translate with the image away from borders") {
  Rng rng(79);
  GrayImage img = tadtest::random_image(rng, 16, 14);
  FeatureRaster f0 = extract_features(img);
  FeatureRaster f1 = extract_features(shifted(img, 3, 2));
  for (int c = 0; c < kFeatures; ++c)
    for (int y = 4; y < 12; ++y)
      for (int x = 5; x < 14; ++x)
        CHECK(f1.plane(c)[y * 16 + x] ==
              doctest::Approx(f0.plane(c)[(y - 2) * 16 + (x - 3)]).epsilon(1e-12));
}

TEST_CASE("zero model: score 0.5 everywhere, domain probability 0.5") {
  ToyModel m = ToyModel::zeros();
  Rng rng(83);
  FeatureRaster f = extract_features(tadtest::random_image(rng, 8, 8));
  Forward fwd;
  forward(m, f, fwd);
  for (double v : fwd.scores.data) CHECK(v == 0.5);
  CHECK(fwd.domain_prob == 0.5);
  CHECK(fwd.pool_count == f.npixels());  // nothing above 0.5: global pool
}

TEST_CASE("forward outputs stay in (0,1) and are deterministic") {
  Rng rng(89);
  ToyModel m = ToyModel::init(7);
  FeatureRaster f = extract_features(tadtest::random_image(rng, 10, 9));
  Forward a, b;
  forward(m, f, a);
  forward(m, f, b);
  CHECK(a.scores.data == b.scores.data);
  CHECK(a.domain_prob == b.domain_prob);
  for (double v : a.scores.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK(a.domain_prob > 0.0);
  CHECK(a.domain_prob < 1.0);
}

TEST_CASE("gradient reversal: scale and sign flip") {
  auto down = grl_backward({1.0, -2.0}, 0.2);
  CHECK(down[0] == doctest::Approx(-0.2));
  CHECK(down[1] == doctest::Approx(0.4));

  auto zero = grl_backward({3.0, -4.0, 5.0}, 0.0);
  for (double v : zero) CHECK(v == 0.0);

  std::vector<double> g{0.3, -1.7, 2.2};
  auto d = grl_backward(g, 0.7);
  double ng = 0, nd = 0;
  for (size_t i = 0; i < g.size(); ++i) {
    ng += g[i] * g[i];
    nd += d[i] * d[i];
  }
  CHECK(std::sqrt(nd) == doctest::Approx(0.7 * std::sqrt(ng)));
  CHECK_THROWS_AS(grl_backward({1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("model file round trip is bit-exact; corrupt files are rejected whole") {
  ToyModel m = ToyModel::init(12345);
  std::string p = tmp_path("tad_t_model.tadm");
  save_model(m, p);
  ToyModel back = load_model(p);
  CHECK(back.backbone == m.backbone);
  CHECK(back.head == m.head);
  CHECK(back.domain == m.domain);

  std::string bytes = io::read_file(p);
  std::string bad = bytes;
  bad[0] = 'X';
  io::write_file(p, bad);
  CHECK_THROWS_AS(load_model(p), FormatError);

  Rng rng(97);
  for (int trial = 0; trial < 16; ++trial) {
    std::string cut = bytes.substr(0, size_t(rng.uniform_int(0, int(bytes.size()) - 1)));
    io::write_file(p, cut);
    CHECK_THROWS_AS(load_model(p), FormatError);  // no partial model ever escapes
  }
}

TEST_CASE("adam update matches a reference evaluation at 1e-12") {
  AtaConfig cfg;
  cfg.lr = 0.01;
  std::vector<float> params{0.5f, -0.25f, 1.5f};
  std::vector<double> m{0.1, -0.2, 0.0};
  std::vector<double> v{0.04, 0.09, 0.0};
  std::vector<double> g{0.3, -0.1, 0.7};
  int64_t t = 7;

  std::vector<double> want(3);
  for (int i = 0; i < 3; ++i) {  // straightforward reference
    double mi = 0.9 * m[i] + 0.1 * g[i];
    double vi = 0.999 * v[i] + 0.001 * g[i] * g[i];
    double mhat = mi / (1.0 - std::pow(0.9, 7.0));
    double vhat = vi / (1.0 - std::pow(0.999, 7.0));
    want[i] = double(params[i]) - 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
  }
  adam_update(params, m, v, g, t, cfg);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(double(params[i]) - want[i]) < 1e-12 + 1e-7);
  // moments themselves are double precision: exact reference match
  CHECK(m[0] == doctest::Approx(0.9 * 0.1 + 0.1 * 0.3).epsilon(1e-15));
}

TEST_CASE("routed per-space gradients match finite differences on a micro-batch") {
  MicroBatch batch = make_micro_batch(2024, 7, 6, true);
  ToyModel m = ToyModel::init(55);
  AtaConfig cfg;
  cfg.lambda = 0.2;
  losses::LossConfig loss_cfg;

  StepGrads g = compute_step_gradients(m, batch.samples, cfg, loss_cfg);

  struct SpaceRef {
    ParamSpace space;
    std::vector<float>* params;
    const std::vector<double>* grad;
  };
  SpaceRef spaces[] = {{ParamSpace::Backbone, &m.backbone, &g.backbone},
                       {ParamSpace::Head, &m.head, &g.head},
                       {ParamSpace::Domain, &m.domain, &g.domain}};

  for (const SpaceRef& ref : spaces) {
    std::vector<double> fd(ref.params->size());
    for (size_t i = 0; i < ref.params->size(); ++i) {
      float keep = (*ref.params)[i];
      float plus = float(double(keep) + 1e-4);
      float minus = float(double(keep) - 1e-4);
      (*ref.params)[i] = plus;
      double fp = routed_objective(m, batch.samples, ref.space, cfg, loss_cfg, g.pool_masks);
      (*ref.params)[i] = minus;
      double fm = routed_objective(m, batch.samples, ref.space, cfg, loss_cfg, g.pool_masks);
      (*ref.params)[i] = keep;
      fd[i] = (fp - fm) / (double(plus) - double(minus));
    }
    INFO("space ", int(ref.space));
    CHECK(rel_l2_error(fd, *ref.grad) < 1e-4);
  }
}

TEST_CASE("lambda=0 training is bitwise identical to a run without the domain branch") {
  MicroBatch batch = make_micro_batch(31337);
  AtaConfig cfg;
  cfg.lambda = 0.0;
  cfg.iters = 25;
  cfg.batch_source = 2;
  cfg.batch_target = 2;
  cfg.seed = 5;
  losses::LossConfig loss_cfg;

  std::vector<Sample> source{batch.samples[0], batch.samples[1]};
  std::vector<Sample> target{batch.samples[2], batch.samples[3]};

  TrainResult with_domain = pretrain(source, target, cfg, loss_cfg, true);
  TrainResult without = pretrain(source, target, cfg, loss_cfg, false);

  CHECK(with_domain.model.backbone == without.model.backbone);
  CHECK(with_domain.model.head == without.model.head);

  Rng rng(3);
  FeatureRaster probe_f = extract_features(tadtest::random_image(rng, 7, 6));
  Forward a, b;
  forward(with_domain.model, probe_f, a);
  forward(without.model, probe_f, b);
  CHECK(a.scores.data == b.scores.data);
}

TEST_CASE("same seed, same trajectory: trained models are identical") {
  MicroBatch batch = make_micro_batch(777);
  AtaConfig cfg;
  cfg.iters = 20;
  cfg.batch_source = 2;
  cfg.batch_target = 2;
  cfg.seed = 99;
  losses::LossConfig loss_cfg;
  std::vector<Sample> source{batch.samples[0], batch.samples[1]};
  std::vector<Sample> target{batch.samples[2], batch.samples[3]};

  TrainResult a = pretrain(source, target, cfg, loss_cfg);
  TrainResult b = pretrain(source, target, cfg, loss_cfg);
  CHECK(a.model.backbone == b.model.backbone);
  CHECK(a.model.head == b.model.head);
  CHECK(a.model.domain == b.model.domain);
  REQUIRE(a.curve.size() == b.curve.size());
  for (size_t i = 0; i < a.curve.size(); ++i)
    CHECK(a.curve[i].domain_loss == b.curve[i].domain_loss);
}

TEST_CASE("training csv schema") {
  CHECK(diagnostics_csv_header() == std::string("iter,L_task_src,L_task_tgt,L_d,domain_acc"));
  StepDiagnostics d;
  d.iter = 3;
  d.task_src = 0.5;
  d.task_tgt = std::nan("");
  d.domain_loss = 0.7;
  d.domain_accuracy = 0.25;
  std::string line = diagnostics_csv_line(d);
  CHECK(line.find("3,0.5,nan,0.7,0.25") == 0);
}

TEST_CASE("logistic probe separates what is separable") {
  Rng rng(101);
  std::vector<std::vector<double>> x_train, x_test;
  std::vector<uint8_t> y_train, y_test;
  for (int i = 0; i < 120; ++i) {
    uint8_t y = rng.coin();
    std::vector<double> v{rng.normal(y ? 1.5 : -1.5, 0.4), rng.normal(0, 1)};
    if (i < 80) {
      x_train.push_back(v);
      y_train.push_back(y);
    } else {
      x_test.push_back(v);
      y_test.push_back(y);
    }
  }
  ProbeResult r = fit_logistic_probe(x_train, y_train, x_test, y_test);
  CHECK(r.test_accuracy >= 0.95);
}
