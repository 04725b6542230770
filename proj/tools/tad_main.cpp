// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
//
// `tad` — command-line surface for the synthetic-to-real text detection
// adaptation toolkit. Subcommands: datagen, swt, pretrain, pseudolabel,
// finetune, adapt, predict, eval.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tad/datagen.hpp"
#include "tad/eval.hpp"
#include "tad/io.hpp"
#include "tad/pipeline.hpp"
#include "tad/swt.hpp"
#include "tad/toymodel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

tad::swt::Polarity parse_polarity(const std::string& s) {
  if (s == "dark") return tad::swt::Polarity::DarkOnLight;
  if (s == "light") return tad::swt::Polarity::LightOnDark;
  if (s == "both") return tad::swt::Polarity::Both;
  throw CLI::ValidationError("--polarity must be dark, light or both");
}

void emit_csv(const std::vector<tad::model::StepDiagnostics>& curve, std::ostream& os) {
  os << tad::model::diagnostics_csv_header() << "\n";
  for (const auto& d : curve) os << tad::model::diagnostics_csv_line(d) << "\n";
}

void write_csv_target(const std::vector<tad::model::StepDiagnostics>& curve,
                      const std::string& log_path) {
  if (log_path.empty()) {
    emit_csv(curve, std::cout);
  } else {
    std::ofstream f(log_path, std::ios::trunc);
    if (!f) throw tad::FormatError(log_path + ": cannot open for writing");
    emit_csv(curve, f);
  }
}

json stage_json(const tad::pipeline::StageSummary& s) {
  return {{"iters", s.iters},
          {"L_task_src", s.task_src},
          {"L_task_tgt", s.task_tgt},
          {"L_d", s.domain_loss},
          {"domain_acc", s.domain_accuracy}};
}

json metrics_json(const tad::DetectionMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"fscore", m.fscore}};
}

struct CommonTrainFlags {
  double lambda = 0.2;
  double lr = 0.01;
  int iters = 2000;
  int batch_source = 6;
  int batch_target = 6;
  uint64_t seed = 1;
};

void add_train_flags(CLI::App* cmd, CommonTrainFlags& f) {
  cmd->add_option("--lambda", f.lambda, "domain-confusion tradeoff")->capture_default_str();
  cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--iters", f.iters, "training iterations")->capture_default_str();
  cmd->add_option("--batch-source", f.batch_source, "source images per step")
      ->capture_default_str();
  cmd->add_option("--batch-target", f.batch_target, "target images per step")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
}

tad::model::AtaConfig to_ata(const CommonTrainFlags& f) {
  tad::model::AtaConfig cfg;
  cfg.lambda = f.lambda;
  cfg.lr = f.lr;
  cfg.iters = f.iters;
  cfg.batch_source = f.batch_source;
  cfg.batch_target = f.batch_target;
  cfg.seed = f.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textadapt: synthetic-to-real domain adaptation for scene text detection"};
  app.require_subcommand(1);
  std::function<void()> run;

  // ---- datagen ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("datagen", "generate a two-domain desk dataset");
    auto out = std::make_shared<std::string>();
    auto n_source = std::make_shared<int>(48);
    auto n_tt = std::make_shared<int>(48);
    auto n_te = std::make_shared<int>(24);
    auto seed = std::make_shared<uint64_t>(1);
    auto jobs = std::make_shared<int>(1);
    auto cfg = std::make_shared<tad::datagen::SceneConfig>();
    cmd->add_option("--out", *out, "output directory")->required();
    cmd->add_option("--n-source", *n_source, "source images")->capture_default_str();
    cmd->add_option("--n-target-train", *n_tt, "unlabeled target images")->capture_default_str();
    cmd->add_option("--n-target-test", *n_te, "held-out target images")->capture_default_str();
    cmd->add_option("--seed", *seed, "RNG seed")->capture_default_str();
    cmd->add_option("--width", cfg->width, "image width")->capture_default_str();
    cmd->add_option("--height", cfg->height, "image height")->capture_default_str();
    cmd->add_option("--min-words", cfg->min_words)->capture_default_str();
    cmd->add_option("--max-words", cfg->max_words)->capture_default_str();
    cmd->add_option("--min-stroke", cfg->min_stroke)->capture_default_str();
    cmd->add_option("--max-stroke", cfg->max_stroke)->capture_default_str();
    cmd->add_option("--jobs", *jobs, "parallel image generation")->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        auto summary = tad::datagen::make_dataset(*out, *n_source, *n_tt, *n_te, *seed, *cfg,
                                                  *jobs);
        std::printf("datagen: wrote %d source, %d target_train, %d target_test under %s\n",
                    summary.n_source, summary.n_target_train, summary.n_target_test,
                    summary.root.c_str());
        if (summary.words_dropped > 0)
          std::fprintf(stderr, "datagen: %d words dropped after placement retries\n",
                       summary.words_dropped);
      };
    });
  }

  // ---- swt -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("swt", "stroke width transform of one image");
    auto image = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto polarity = std::make_shared<std::string>("dark");
    auto cfg = std::make_shared<tad::swt::SwtConfig>();
    cmd->add_option("--image", *image, "input PGM")->required();
    cmd->add_option("--out", *out, "output SMAP raster")->required();
    cmd->add_option("--polarity", *polarity, "dark|light|both")->capture_default_str();
    cmd->add_option("--canny-low", cfg->canny_low)->capture_default_str();
    cmd->add_option("--canny-high", cfg->canny_high)->capture_default_str();
    cmd->add_option("--max-ray-len", cfg->max_ray_len, "0 = diagonal/4")->capture_default_str();
    cmd->add_option("--angle-tol", cfg->angle_tolerance, "radians")->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        tad::swt::SwtConfig c = *cfg;
        c.polarity = parse_polarity(*polarity);
        tad::GrayImage img = tad::io::read_pgm(*image);
        tad::io::write_swt_map(tad::swt::stroke_width_transform(img, c), *out);
      };
    });
  }

  // ---- pretrain ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("pretrain", "stage 1: source task + domain confusion");
    auto data = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto log = std::make_shared<std::string>();
    auto jobs = std::make_shared<int>(1);
    auto flags = std::make_shared<CommonTrainFlags>();
    cmd->add_option("--data", *data, "dataset root (needs source/ and target_train/)")
        ->required();
    cmd->add_option("--out", *out, "output model file")->required();
    add_train_flags(cmd, *flags);
    cmd->add_option("--log", *log, "write the diagnostics CSV here instead of stdout");
    cmd->add_option("--jobs", *jobs, "parallel feature extraction")->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        auto source = tad::pipeline::load_split(*data + "/source", true, *jobs);
        auto target = tad::pipeline::load_split(*data + "/target_train", false, *jobs);
        auto src = tad::pipeline::prepare_source(source, *jobs);
        auto tgt = tad::pipeline::prepare_target(target, *jobs);
        tad::losses::LossConfig loss_cfg;
        auto sv = tad::pipeline::sample_views(src);
        auto tv = tad::pipeline::sample_views(tgt);
        auto result = tad::model::pretrain(sv, tv, to_ata(*flags), loss_cfg);
        tad::model::save_model(result.model, *out);
        write_csv_target(result.curve, *log);
      };
    });
  }

  // ---- pseudolabel ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("pseudolabel", "stage 2a: filtered target pseudo-labels");
    auto model_path = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto polarity = std::make_shared<std::string>("dark");
    auto jobs = std::make_shared<int>(1);
    auto tst = std::make_shared<tad::strokestats::TstConfig>();
    auto swt_cfg = std::make_shared<tad::swt::SwtConfig>();
    cmd->add_option("--model", *model_path, "stage-1 model")->required();
    cmd->add_option("--data", *data, "dataset root (uses target_train/)")->required();
    cmd->add_option("--out", *out, "label output directory")->required();
    cmd->add_option("--eta", tst->eta, "kept fraction of candidate negatives")
        ->capture_default_str();
    cmd->add_option("--eps1", tst->eps1, "stroke-width sigma upper threshold")
        ->capture_default_str();
    cmd->add_option("--eps2", tst->eps2, "stroke-width score lower threshold")
        ->capture_default_str();
    cmd->add_option("--score-threshold", tst->score_threshold)->capture_default_str();
    cmd->add_option("--min-box-area", tst->min_box_area)->capture_default_str();
    cmd->add_option("--min-stroke-pixels", tst->min_stroke_pixels)->capture_default_str();
    cmd->add_option("--polarity", *polarity, "dark|light|both")->capture_default_str();
    cmd->add_option("--jobs", *jobs)->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        tad::swt::SwtConfig sc = *swt_cfg;
        sc.polarity = parse_polarity(*polarity);
        auto m = tad::model::load_model(*model_path);
        auto target = tad::pipeline::load_split(*data + "/target_train", false, *jobs);
        auto batch = tad::pipeline::generate_pseudo_labels(m, target, *tst, sc, *jobs);
        tad::pipeline::AdaptConfig hash_cfg;
        hash_cfg.tst = *tst;
        hash_cfg.swt = sc;
        tad::pipeline::write_pseudo_labels(*out, batch, 0, tad::pipeline::config_hash(hash_cfg));
        std::printf("pseudolabel: %zu images, %zu boxes extracted, %zu kept "
                    "(%zu sigma-rejected, %zu score-rejected, %zu low-evidence)\n",
                    batch.stats.images, batch.stats.boxes_extracted, batch.stats.boxes_kept,
                    batch.stats.rejected_sigma, batch.stats.rejected_sws,
                    batch.stats.low_evidence);
      };
    });
  }

  // ---- finetune -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("finetune", "stage 2b: fine-tune on pseudo-labels");
    auto model_path = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto labels = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto log = std::make_shared<std::string>();
    auto jobs = std::make_shared<int>(1);
    auto flags = std::make_shared<CommonTrainFlags>();
    cmd->add_option("--model", *model_path, "stage-1 model")->required();
    cmd->add_option("--data", *data, "dataset root")->required();
    cmd->add_option("--labels", *labels, "pseudo-label directory")->required();
    cmd->add_option("--out", *out, "output model file")->required();
    add_train_flags(cmd, *flags);
    cmd->add_option("--log", *log, "write the diagnostics CSV here instead of stdout");
    cmd->add_option("--jobs", *jobs)->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        auto m = tad::model::load_model(*model_path);
        auto source = tad::pipeline::load_split(*data + "/source", true, *jobs);
        auto target = tad::pipeline::load_split(*data + "/target_train", false, *jobs);
        auto src = tad::pipeline::prepare_source(source, *jobs);
        auto tgt = tad::pipeline::prepare_target(target, *jobs);
        tad::pipeline::apply_pseudo_labels(tgt, tad::pipeline::read_pseudo_labels(*labels));
        tad::losses::LossConfig loss_cfg;
        auto result = tad::pipeline::fine_tune(std::move(m), src, tgt, to_ata(*flags), loss_cfg);
        tad::model::save_model(result.model, *out);
        write_csv_target(result.curve, *log);
      };
    });
  }

  // ---- adapt ------------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("adapt", "full two-stage adaptation, writes a run report");
    auto data = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto flags = std::make_shared<CommonTrainFlags>();
    auto finetune_iters = std::make_shared<int>(2000);
    auto skip_selftrain = std::make_shared<bool>(false);
    auto jobs = std::make_shared<int>(1);
    auto tst = std::make_shared<tad::strokestats::TstConfig>();
    cmd->add_option("--data", *data, "dataset root")->required();
    cmd->add_option("--out", *out, "run output directory")->required();
    add_train_flags(cmd, *flags);
    cmd->add_option("--finetune-iters", *finetune_iters)->capture_default_str();
    cmd->add_option("--eta", tst->eta)->capture_default_str();
    cmd->add_option("--eps1", tst->eps1)->capture_default_str();
    cmd->add_option("--eps2", tst->eps2)->capture_default_str();
    cmd->add_option("--score-threshold", tst->score_threshold)->capture_default_str();
    cmd->add_option("--min-box-area", tst->min_box_area)->capture_default_str();
    cmd->add_flag("--skip-selftrain", *skip_selftrain, "stop after stage 1 (no pseudo-labels)");
    cmd->add_option("--jobs", *jobs)->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        tad::pipeline::AdaptConfig cfg;
        cfg.pretrain = to_ata(*flags);
        cfg.finetune = cfg.pretrain;
        cfg.finetune.iters = *finetune_iters;
        cfg.tst = *tst;
        cfg.self_train = !*skip_selftrain;
        cfg.jobs = *jobs;

        auto source = tad::pipeline::load_split(*data + "/source", true, *jobs);
        auto target = tad::pipeline::load_split(*data + "/target_train", false, *jobs);
        auto result = tad::pipeline::adapt(source, target, cfg);

        fs::create_directories(*out);
        tad::model::save_model(result.pretrained, *out + "/model_pretrain.tadm");
        tad::model::save_model(result.final_model, *out + "/model_final.tadm");
        {
          std::ofstream f(*out + "/train_pretrain.csv");
          emit_csv(result.curve_stage1, f);
        }
        if (cfg.self_train) {
          tad::pipeline::write_pseudo_labels(*out + "/labels", result.pseudo,
                                             cfg.pretrain.seed, tad::pipeline::config_hash(cfg));
          std::ofstream f(*out + "/train_finetune.csv");
          emit_csv(result.curve_stage2, f);
        }

        // predictions for the held-out target split, ready for `tad eval`
        auto test = tad::pipeline::load_split(*data + "/target_test", false, *jobs);
        auto preds = tad::pipeline::predict_boxes(result.final_model, test,
                                                  cfg.tst.score_threshold,
                                                  cfg.tst.min_box_area, *jobs);
        tad::pipeline::write_predictions(*out + "/pred_target_test", preds);

        json report;
        report["format"] = "textadapt-run";
        report["version"] = 1;
        report["seed"] = cfg.pretrain.seed;
        report["config_hash"] = tad::pipeline::config_hash(cfg);
        report["self_train"] = cfg.self_train;
        report["lambda"] = cfg.pretrain.lambda;
        report["stage1"] = stage_json(result.stage1);
        if (cfg.self_train) {
          report["stage2"] = stage_json(result.stage2);
          report["pseudo_labels"] = {{"images", result.pseudo.stats.images},
                                     {"boxes_extracted", result.pseudo.stats.boxes_extracted},
                                     {"boxes_kept", result.pseudo.stats.boxes_kept},
                                     {"rejected_sigma", result.pseudo.stats.rejected_sigma},
                                     {"rejected_sws", result.pseudo.stats.rejected_sws},
                                     {"low_evidence", result.pseudo.stats.low_evidence}};
        }
        tad::io::write_file(*out + "/report.json", report.dump(2) + "\n");
        std::printf("adapt: report written to %s/report.json\n", out->c_str());
      };
    });
  }

  // ---- predict ----------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("predict", "write ICDAR box files for a model on a split");
    auto model_path = std::make_shared<std::string>();
    auto images = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto thr = std::make_shared<double>(0.8);
    auto min_area = std::make_shared<double>(16.0);
    auto jobs = std::make_shared<int>(1);
    cmd->add_option("--model", *model_path)->required();
    cmd->add_option("--images", *images, "directory of .pgm images")->required();
    cmd->add_option("--out", *out, "prediction output directory")->required();
    cmd->add_option("--score-threshold", *thr)->capture_default_str();
    cmd->add_option("--min-box-area", *min_area)->capture_default_str();
    cmd->add_option("--jobs", *jobs)->capture_default_str();
    cmd->callback([=, &run] {
      run = [=] {
        auto m = tad::model::load_model(*model_path);
        auto data = tad::pipeline::load_split(*images, false, *jobs);
        auto preds = tad::pipeline::predict_boxes(m, data, *thr, *min_area, *jobs);
        tad::pipeline::write_predictions(*out, preds);
      };
    });
  }

  // ---- eval -------------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("eval", "ICDAR-style precision/recall/F-score");
    auto pred = std::make_shared<std::string>();
    auto gt = std::make_shared<std::string>();
    auto iou = std::make_shared<double>(0.5);
    auto json_path = std::make_shared<std::string>();
    cmd->add_option("--pred", *pred, "prediction directory")->required();
    cmd->add_option("--gt", *gt, "ground-truth directory")->required();
    cmd->add_option("--iou", *iou, "IoU threshold")->capture_default_str();
    cmd->add_option("--json", *json_path, "also write the JSON metrics to this file");
    cmd->callback([=, &run] {
      run = [=] {
        auto preds = tad::pipeline::read_boxes_dir(*pred);
        auto gts = tad::pipeline::read_boxes_dir(*gt);
        tad::DetectionMetrics m = tad::eval::evaluate(preds, gts, *iou);
        std::printf("%.3f %.3f %.3f\n", 100.0 * m.precision, 100.0 * m.recall,
                    100.0 * m.fscore);
        json j = metrics_json(m);
        j["iou_threshold"] = *iou;
        std::printf("%s\n", j.dump().c_str());
        if (!json_path->empty()) tad::io::write_file(*json_path, j.dump(2) + "\n");
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  }

  try {
    run();
  } catch (const tad::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const tad::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
