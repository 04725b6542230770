// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "tad/geometry.hpp"
#include "tad/io.hpp"
#include "tad/losses.hpp"
#include "tad/parallel.hpp"

namespace fs = std::filesystem;

namespace tad::pipeline {

// ---- loading ----------------------------------------------------------------

DomainData load_split(const std::string& dir, bool with_gt, int jobs) {
  if (!fs::is_directory(dir)) throw FormatError(dir + ": not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() == ".pgm") ids.push_back(p.stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw FormatError(dir + ": no .pgm images found");

  DomainData data;
  data.images.resize(ids.size());
  parallel_for(ids.size(), jobs, [&](size_t i) {
    LoadedImage& li = data.images[i];
    li.id = ids[i];
    li.image = io::read_pgm(dir + "/" + ids[i] + ".pgm");
    if (with_gt) {
      li.gt = io::read_icdar_boxes(dir + "/gt_" + ids[i] + ".txt");
      li.has_gt = true;
    }
  });
  return data;
}

// ---- box extraction ------------------------------------------------------------

std::vector<QuadBox> extract_boxes(const ScoreMap& scores, double score_threshold,
                                   double min_box_area) {
  if (!(score_threshold > 0.0 && score_threshold < 1.0))
    throw std::invalid_argument("extract_boxes: score_threshold must be in (0,1)");
  const int w = scores.width, h = scores.height;
  const size_t n = scores.npixels();

  std::vector<uint8_t> visited(n, 0);
  std::vector<QuadBox> boxes;
  std::deque<size_t> queue;
  std::vector<size_t> component;

  for (size_t start = 0; start < n; ++start) {
    if (visited[start] || scores.data[start] <= score_threshold) continue;
    component.clear();
    queue.clear();
    queue.push_back(start);
    visited[start] = 1;
    while (!queue.empty()) {
      size_t i = queue.front();
      queue.pop_front();
      component.push_back(i);
      int x = int(i % size_t(w)), y = int(i / size_t(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          size_t j = size_t(yy) * w + xx;
          if (!visited[j] && scores.data[j] > score_threshold) {
            visited[j] = 1;
            queue.push_back(j);
          }
        }
      }
    }

    std::vector<Vec2> corners;
    corners.reserve(component.size() * 4);
    double conf = 0.0;
    for (size_t i : component) {
      double x = double(i % size_t(w)), y = double(i / size_t(w));
      corners.push_back({x, y});
      corners.push_back({x + 1, y});
      corners.push_back({x, y + 1});
      corners.push_back({x + 1, y + 1});
      conf += scores.data[i];
    }
    QuadBox box;
    box.v = geometry::min_area_rect(corners);
    box.confidence = conf / double(component.size());
    if (box.area() >= min_box_area) boxes.push_back(box);
  }
  return boxes;
}

ScoreMap rasterize_boxes(const std::vector<QuadBox>& boxes, int width, int height) {
  ScoreMap gt(width, height, 0.0);
  for (const QuadBox& b : boxes) {
    if (b.ignore) continue;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Vec2& p : b.v) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    int x0 = std::max(0, int(std::floor(xmin - 0.5)));
    int x1 = std::min(width - 1, int(std::ceil(xmax)));
    int y0 = std::max(0, int(std::floor(ymin - 0.5)));
    int y1 = std::min(height - 1, int(std::ceil(ymax)));
    std::span<const Vec2> poly(b.v.data(), 4);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (geometry::point_in_polygon({x + 0.5, y + 0.5}, poly)) gt.at(x, y) = 1.0;
  }
  return gt;
}

// ---- prepared samples ------------------------------------------------------------

std::vector<PreparedSample> prepare_source(const DomainData& data, int jobs) {
  std::vector<PreparedSample> out(data.images.size());
  parallel_for(data.images.size(), jobs, [&](size_t i) {
    const LoadedImage& li = data.images[i];
    if (!li.has_gt)
      throw std::invalid_argument("prepare_source: image '" + li.id + "' has no ground truth");
    PreparedSample& s = out[i];
    s.id = li.id;
    s.features = model::extract_features(li.image);
    s.gt = rasterize_boxes(li.gt, li.image.width, li.image.height);
    s.has_gt = true;
    s.domain_label = 0;
  });
  return out;
}

std::vector<PreparedSample> prepare_target(const DomainData& data, int jobs) {
  std::vector<PreparedSample> out(data.images.size());
  parallel_for(data.images.size(), jobs, [&](size_t i) {
    PreparedSample& s = out[i];
    s.id = data.images[i].id;
    s.features = model::extract_features(data.images[i].image);
    s.domain_label = 1;
  });
  return out;
}

std::vector<model::Sample> sample_views(const std::vector<PreparedSample>& prepared) {
  std::vector<model::Sample> views;
  views.reserve(prepared.size());
  for (const PreparedSample& p : prepared) {
    model::Sample s;
    s.features = &p.features;
    s.gt = p.has_gt ? &p.gt : nullptr;
    s.partition = p.has_partition ? &p.partition : nullptr;
    s.domain_label = p.domain_label;
    views.push_back(s);
  }
  return views;
}

// ---- pseudo-labels ----------------------------------------------------------------

PseudoLabelBatch generate_pseudo_labels(const model::ToyModel& m, const DomainData& target,
                                        const strokestats::TstConfig& tst,
                                        const swt::SwtConfig& swt_cfg, int jobs) {
  tst.validate();
  PseudoLabelBatch batch;
  batch.labels.resize(target.images.size());
  batch.reports.resize(target.images.size());
  std::vector<PseudoLabelStats> per_image(target.images.size());

  parallel_for(target.images.size(), jobs, [&](size_t i) {
    const LoadedImage& li = target.images[i];
    const int w = li.image.width, h = li.image.height;

    ScoreMap scores = model::predict_scoremap(m, li.image);
    std::vector<QuadBox> proposals =
        extract_boxes(scores, tst.score_threshold, tst.min_box_area);
    StrokeWidthMap swt_map = swt::stroke_width_transform(li.image, swt_cfg);
    strokestats::FilterResult filtered = strokestats::filter_boxes(proposals, swt_map, tst);

    ScoreMap positive = rasterize_boxes(filtered.kept, w, h);
    std::vector<uint8_t> candidates(positive.npixels());
    for (size_t k = 0; k < candidates.size(); ++k)
      candidates[k] = positive.data[k] == 0.0;

    PseudoLabel& label = batch.labels[i];
    label.image_id = li.id;
    label.boxes = filtered.kept;
    label.partition = losses::select_negatives(scores, candidates, tst.eta);
    batch.reports[i] = strokestats::rejection_report(filtered);

    PseudoLabelStats& s = per_image[i];
    s.images = 1;
    s.boxes_extracted = proposals.size();
    s.boxes_kept = filtered.kept.size();
    for (const auto& r : filtered.rejected) {
      if (r.reason == strokestats::RejectReason::Sigma) ++s.rejected_sigma;
      else ++s.rejected_sws;
    }
    for (const auto& st : filtered.stats)
      if (st.low_evidence) ++s.low_evidence;
  });

  for (const PseudoLabelStats& s : per_image) {
    batch.stats.images += s.images;
    batch.stats.boxes_extracted += s.boxes_extracted;
    batch.stats.boxes_kept += s.boxes_kept;
    batch.stats.rejected_sigma += s.rejected_sigma;
    batch.stats.rejected_sws += s.rejected_sws;
    batch.stats.low_evidence += s.low_evidence;
  }
  return batch;
}

void write_pseudo_labels(const std::string& dir, const PseudoLabelBatch& batch,
                         uint64_t seed, const std::string& cfg_hash) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "textadapt-pseudolabels";
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["config_hash"] = cfg_hash;
  std::vector<std::string> ids;
  for (size_t i = 0; i < batch.labels.size(); ++i) {
    const PseudoLabel& label = batch.labels[i];
    ids.push_back(label.image_id);
    io::write_icdar_boxes(label.boxes, dir + "/gt_" + label.image_id + ".txt");
    io::write_partition(label.partition, dir + "/part_" + label.image_id + ".smap");
    io::write_file(dir + "/rej_" + label.image_id + ".txt", batch.reports[i]);
  }
  manifest["images"] = ids;
  manifest["stats"] = {{"boxes_extracted", batch.stats.boxes_extracted},
                       {"boxes_kept", batch.stats.boxes_kept},
                       {"rejected_sigma", batch.stats.rejected_sigma},
                       {"rejected_sws", batch.stats.rejected_sws},
                       {"low_evidence", batch.stats.low_evidence}};
  io::write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::vector<PseudoLabel> read_pseudo_labels(const std::string& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_file(dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  if (manifest.value("format", "") != "textadapt-pseudolabels")
    throw FormatError(dir + "/manifest.json: not a pseudo-label manifest");
  std::vector<PseudoLabel> labels;
  for (const auto& id : manifest.at("images")) {
    PseudoLabel label;
    label.image_id = id.get<std::string>();
    label.boxes = io::read_icdar_boxes(dir + "/gt_" + label.image_id + ".txt");
    label.partition = io::read_partition(dir + "/part_" + label.image_id + ".smap");
    labels.push_back(std::move(label));
  }
  return labels;
}

void apply_pseudo_labels(std::vector<PreparedSample>& target,
                         const std::vector<PseudoLabel>& labels) {
  std::map<std::string, const PseudoLabel*> by_id;
  for (const PseudoLabel& l : labels) by_id[l.image_id] = &l;
  for (PreparedSample& s : target) {
    auto it = by_id.find(s.id);
    if (it == by_id.end())
      throw FormatError("apply_pseudo_labels: no label for image '" + s.id + "'");
    const PseudoLabel& l = *it->second;
    if (l.partition.width != s.features.width || l.partition.height != s.features.height)
      throw FormatError("apply_pseudo_labels: partition shape mismatch for '" + s.id + "'");
    s.partition = l.partition;
    s.has_partition = true;
    // positives raster doubles as the weak-loss ground truth
    s.gt = ScoreMap(l.partition.width, l.partition.height, 0.0);
    for (size_t i = 0; i < s.gt.data.size(); ++i)
      s.gt.data[i] = l.partition.state[i] == PixelState::Positive ? 1.0 : 0.0;
    s.has_gt = true;
  }
}

// ---- training stages ------------------------------------------------------------

model::TrainResult fine_tune(model::ToyModel start, const std::vector<PreparedSample>& source,
                             const std::vector<PreparedSample>& target,
                             const model::AtaConfig& cfg, const losses::LossConfig& loss_cfg) {
  std::vector<model::Sample> src = sample_views(source);
  std::vector<model::Sample> tgt = sample_views(target);
  return model::continue_training(std::move(start), src, tgt, cfg, loss_cfg,
                                  "batch-finetune");
}

namespace {

StageSummary summarize(const std::vector<model::StepDiagnostics>& curve, int iters) {
  StageSummary s;
  s.iters = iters;
  if (!curve.empty()) {
    const model::StepDiagnostics& d = curve.back();
    s.task_src = d.task_src;
    s.task_tgt = d.task_tgt;
    s.domain_loss = d.domain_loss;
    s.domain_accuracy = d.domain_accuracy;
  }
  return s;
}

}  // namespace

AdaptResult adapt(const DomainData& source, const DomainData& target, const AdaptConfig& cfg) {
  AdaptResult result;

  std::vector<PreparedSample> src = prepare_source(source, cfg.jobs);
  std::vector<PreparedSample> tgt = prepare_target(target, cfg.jobs);

  {
    std::vector<model::Sample> sv = sample_views(src);
    std::vector<model::Sample> tv = sample_views(tgt);
    model::TrainResult stage1 = model::pretrain(sv, tv, cfg.pretrain, cfg.loss);
    result.pretrained = stage1.model;
    result.stage1 = summarize(stage1.curve, cfg.pretrain.iters);
    result.curve_stage1 = std::move(stage1.curve);
  }

  if (!cfg.self_train) {
    result.final_model = result.pretrained;
    return result;
  }

  result.pseudo = generate_pseudo_labels(result.pretrained, target, cfg.tst, cfg.swt, cfg.jobs);
  apply_pseudo_labels(tgt, result.pseudo.labels);

  model::TrainResult stage2 = fine_tune(result.pretrained, src, tgt, cfg.finetune, cfg.loss);
  result.final_model = std::move(stage2.model);
  result.stage2 = summarize(stage2.curve, cfg.finetune.iters);
  result.curve_stage2 = std::move(stage2.curve);
  return result;
}

// ---- prediction / evaluation glue ---------------------------------------------------

std::vector<eval::ImageBoxes> predict_boxes(const model::ToyModel& m, const DomainData& data,
                                            double score_threshold, double min_box_area,
                                            int jobs) {
  std::vector<eval::ImageBoxes> out(data.images.size());
  parallel_for(data.images.size(), jobs, [&](size_t i) {
    ScoreMap scores = model::predict_scoremap(m, data.images[i].image);
    std::vector<QuadBox> boxes = extract_boxes(scores, score_threshold, min_box_area);
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const QuadBox& a, const QuadBox& b) { return a.confidence > b.confidence; });
    out[i] = {data.images[i].id, std::move(boxes)};
  });
  return out;
}

void write_predictions(const std::string& dir, const std::vector<eval::ImageBoxes>& preds) {
  fs::create_directories(dir);
  for (const eval::ImageBoxes& p : preds)
    io::write_icdar_boxes(p.boxes, dir + "/" + p.image_id + ".txt");
}

std::vector<eval::ImageBoxes> read_boxes_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir + ": not a directory");
  std::vector<eval::ImageBoxes> out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".txt") continue;
    std::string stem = entry.path().stem().string();
    if (stem.rfind("rej_", 0) == 0) continue;  // rejection reports, not boxes
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    std::string id = p.stem().string();
    if (id.rfind("gt_", 0) == 0) id = id.substr(3);
    out.push_back({id, io::read_icdar_boxes(p.string())});
  }
  return out;
}

std::string config_hash(const AdaptConfig& cfg) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "pre:%g,%g,%d,%d,%d,%llu|fin:%g,%g,%d,%llu|tst:%g,%g,%g,%g,%g,%d,%g|"
                "swt:%g,%g,%d,%d,%g|loss:%d,%g,%g|st:%d",
                cfg.pretrain.lambda, cfg.pretrain.lr, cfg.pretrain.iters,
                cfg.pretrain.batch_source, cfg.pretrain.batch_target,
                (unsigned long long)cfg.pretrain.seed, cfg.finetune.lambda, cfg.finetune.lr,
                cfg.finetune.iters, (unsigned long long)cfg.finetune.seed, cfg.tst.eta,
                cfg.tst.eps1, cfg.tst.eps2, cfg.tst.score_threshold, cfg.tst.min_box_area,
                cfg.tst.min_stroke_pixels, cfg.tst.sigma_sq_floor, cfg.swt.canny_low,
                cfg.swt.canny_high, int(cfg.swt.polarity), cfg.swt.max_ray_len,
                cfg.swt.angle_tolerance, int(cfg.loss.beta_mode), cfg.loss.beta_fixed,
                cfg.loss.epsilon_log, cfg.self_train ? 1 : 0);
  // FNV-1a over the canonical string
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char* c = buf; *c; ++c) {
    h ^= uint64_t(uint8_t(*c));
    h *= 0x100000001b3ull;
  }
  char hex[20];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)h);
  return hex;
}

}  // namespace tad::pipeline
