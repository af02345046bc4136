/* Copyright 2026 The rocdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end for the rocdet C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roc/roc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitCheck = 3;

struct ModelDeleter {
  void operator()(roc_model* m) const { roc_model_free(m); }
};
using ModelPtr = std::unique_ptr<roc_model, ModelDeleter>;

struct StringDeleter {
  void operator()(char* s) const { roc_string_free(s); }
};
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Thrown on a failed API call; carries the process exit code.
struct Failure {
  int exit_code;
};

void ensure(roc_status s, const std::string& context) {
  if (s == ROC_OK) return;
  std::fprintf(stderr, "error: %s: %s (%s)\n", context.c_str(), roc_last_error(),
               roc_status_name(s));
  throw Failure{s == ROC_ERR_IO ? kExitIo : kExitValidation};
}

ModelPtr load_model(const std::string& path, int nc) {
  roc_model* m = nullptr;
  ensure(roc_model_from_config_file(path.c_str(), nc, &m), path);
  return ModelPtr(m);
}

bool want_kv(const std::string& format) { return format == "kv"; }

int cmd_analyze(const std::string& config, const std::string& ref_config, int input_size,
                int nc, const std::string& format) {
  ModelPtr model = load_model(config, nc);
  ModelPtr ref;
  if (!ref_config.empty()) ref = load_model(ref_config, nc);
  char* text = nullptr;
  ensure(roc_analyze_report(model.get(), ref.get(), input_size, input_size, want_kv(format),
                            &text),
         "analyze");
  StringPtr owned(text);
  std::fputs(text, stdout);
  return kExitOk;
}

int cmd_init_weights(const std::string& config, const std::string& out, int nc, uint64_t seed,
                     bool zero, bool f16, bool fold) {
  ModelPtr model = load_model(config, nc);
  ensure(roc_model_init_weights(model.get(), zero ? ROC_INIT_ZERO : ROC_INIT_RANDOM, seed),
         "init");
  if (fold) ensure(roc_model_fold_batchnorm(model.get()), "fold");
  ensure(roc_model_save_weights(model.get(), out.c_str(), f16), out);
  std::printf("elements=%lld\n", static_cast<long long>(roc_model_weight_elements(model.get())));
  return kExitOk;
}

int cmd_forward(const std::string& config, const std::string& weights, const std::string& image,
                const std::string& out, int nc, int input_size, double conf, double nms_iou,
                bool bench, int bench_runs, const std::string& format) {
  ModelPtr model = load_model(config, nc);
  ensure(roc_model_load_weights(model.get(), weights.c_str()), weights);
  roc_detect_options opt = roc_detect_defaults();
  opt.input_size = input_size;
  opt.conf = conf;
  opt.nms_iou = nms_iou;

  roc_detection* dets = nullptr;
  size_t count = 0;
  roc_timing timing{};
  ensure(roc_detect_ppm(model.get(), image.c_str(), &opt, &dets, &count, &timing), image);
  std::unique_ptr<roc_detection, void (*)(roc_detection*)> owned(dets, roc_detections_free);

  if (!out.empty()) {
    ensure(roc_write_detections(out.c_str(), dets, count), out);
  } else {
    for (size_t i = 0; i < count; ++i)
      std::printf("%d %.6f %.6f %.6f %.6f %.6f\n", dets[i].cls, dets[i].conf, dets[i].x1,
                  dets[i].y1, dets[i].x2, dets[i].y2);
  }
  if (!out.empty()) std::printf("detections=%zu\n", count);

  if (bench) {
    double total_ms = 0, infer_ms = 0;
    for (int r = 0; r < bench_runs; ++r) {
      roc_detection* d = nullptr;
      size_t c = 0;
      roc_timing t{};
      ensure(roc_detect_ppm(model.get(), image.c_str(), &opt, &d, &c, &t), image);
      roc_detections_free(d);
      total_ms += t.preprocess_ms + t.inference_ms + t.postprocess_ms;
      infer_ms += t.inference_ms;
    }
    total_ms /= bench_runs;
    infer_ms /= bench_runs;
    if (want_kv(format)) {
      std::printf("bench.runs=%d\nbench.total_ms=%.3f\nbench.inference_ms=%.3f\n", bench_runs,
                  total_ms, infer_ms);
      std::printf("bench.total_fps=%.3f\nbench.inference_fps=%.3f\n", 1000.0 / total_ms,
                  1000.0 / infer_ms);
    } else {
      std::printf("runs %d  total %.3f ms (%.2f FPS)  inference %.3f ms (%.2f FPS)\n", bench_runs,
                  total_ms, 1000.0 / total_ms, infer_ms, 1000.0 / infer_ms);
    }
  }
  return kExitOk;
}

int cmd_gradcheck(const std::string& target, uint64_t seed, bool corrupt) {
  int passed = 0;
  char* report = nullptr;
  ensure(roc_gradcheck(target.c_str(), seed, corrupt, &passed, &report), "gradcheck");
  StringPtr owned(report);
  std::fputs(report, stdout);
  return passed ? kExitOk : kExitCheck;
}

int cmd_train_toy(int steps, double lr, uint64_t seed, const std::string& trace,
                  const std::string& format) {
  roc_toy_result r{};
  ensure(roc_train_toy(steps, lr, seed, trace.empty() ? nullptr : trace.c_str(), &r),
         "train-toy");
  const bool ok = r.diverged_step < 0 && r.reduction >= 0.9;
  if (want_kv(format)) {
    std::printf("steps=%d\ninitial_loss=%.9g\nfinal_loss=%.9g\nreduction=%.6f\naccuracy=%.6f\n",
                r.steps_run, r.initial_loss, r.final_loss, r.reduction, r.accuracy);
    std::printf("diverged_step=%d\npass=%d\n", r.diverged_step, ok ? 1 : 0);
  } else {
    std::printf("steps %d  loss %.6g -> %.6g  reduction %.2f%%  accuracy %.3f  %s\n",
                r.steps_run, r.initial_loss, r.final_loss, 100.0 * r.reduction, r.accuracy,
                ok ? "PASS" : "FAIL");
  }
  return ok ? kExitOk : kExitCheck;
}

int cmd_eval(const std::string& dets, const std::string& labels,
             const std::vector<int>& img_size, int nc, double report_conf,
             const std::string& format) {
  roc_eval_summary s{};
  char* report = nullptr;
  ensure(roc_evaluate_dirs(dets.c_str(), labels.c_str(), img_size[0], img_size[1], nc,
                           report_conf, want_kv(format), &s, &report),
         "eval");
  StringPtr owned(report);
  std::fputs(report, stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rocdet: compact road-damage detector toolkit"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output style")
      ->check(CLI::IsMember({"text", "kv"}))
      ->capture_default_str();

  std::string config, ref_config, weights, image, out, trace, dets_dir, labels_dir, target;
  int input_size = 640, nc = 4, steps = 500, bench_runs = 10;
  uint64_t seed = 0;
  double conf = 0.25, nms_iou = 0.45, lr = 0.01, report_conf = 0.25;
  bool bench = false, zero = false, f16 = false, fold = false, corrupt = false;
  std::vector<int> img_size;

  auto* analyze = app.add_subcommand("analyze", "Static parameter, FLOP and size report");
  analyze->add_option("--config", config, "Model config")->required()->check(CLI::ExistingFile);
  analyze->add_option("--input-size", input_size, "Square input side")->capture_default_str();
  analyze->add_option("--nc", nc, "Class count")->capture_default_str();
  analyze->add_option("--ref-config", ref_config, "Reference config for a diff")
      ->check(CLI::ExistingFile);

  auto* init = app.add_subcommand("init-weights", "Write an initialized weight file");
  init->add_option("--config", config, "Model config")->required()->check(CLI::ExistingFile);
  init->add_option("--out", out, "Weight file to write")->required();
  init->add_option("--nc", nc, "Class count")->capture_default_str();
  init->add_option("--seed", seed, "Random seed")->capture_default_str();
  init->add_flag("--zero", zero, "All-zero weights (identity norm statistics)");
  init->add_flag("--f16", f16, "Store as float16");
  init->add_flag("--fold", fold, "Fold batch norm into conv bias");

  auto* fwd = app.add_subcommand("forward", "Detect objects in a PPM image");
  fwd->add_option("--config", config, "Model config")->required()->check(CLI::ExistingFile);
  fwd->add_option("--weights", weights, "Weight file")->required()->check(CLI::ExistingFile);
  fwd->add_option("--image", image, "Binary PPM image")->required()->check(CLI::ExistingFile);
  fwd->add_option("--out", out, "Detections file (stdout when omitted)");
  fwd->add_option("--nc", nc, "Class count")->capture_default_str();
  fwd->add_option("--input-size", input_size, "Square network input")->capture_default_str();
  fwd->add_option("--conf", conf, "Confidence threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fwd->add_option("--nms-iou", nms_iou, "NMS IoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fwd->add_flag("--bench", bench, "Report total and inference-only throughput");
  fwd->add_option("--bench-runs", bench_runs, "Timed repetitions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gc->add_option("--target", target, "Module under test")
      ->required()
      ->check(CLI::IsMember({"mssa", "cap", "mhsa", "bms", "loss"}));
  gc->add_option("--seed", seed, "Random seed")->capture_default_str();
  gc->add_flag("--corrupt", corrupt, "Negative control: flip the sigmoid gradient");

  auto* toy = app.add_subcommand("train-toy", "Overfit the 8-image direction toy set");
  toy->add_option("--steps", steps, "SGD steps")->check(CLI::PositiveNumber)->capture_default_str();
  toy->add_option("--lr", lr, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  toy->add_option("--seed", seed, "Random seed")->capture_default_str();
  toy->add_option("--trace", trace, "Loss trace file");

  auto* ev = app.add_subcommand("eval", "Precision, recall and mAP over paired directories");
  ev->add_option("--dets", dets_dir, "Detection files")->required();
  ev->add_option("--labels", labels_dir, "Normalized label files")->required();
  ev->add_option("--img-size", img_size, "Image width,height")
      ->required()
      ->delimiter(',')
      ->expected(2);
  ev->add_option("--nc", nc, "Class count")->capture_default_str();
  ev->add_option("--report-conf", report_conf, "Confidence for P/R")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    // A missing input file is an I/O problem, everything else is a usage error.
    if (dynamic_cast<const CLI::ValidationError*>(&e) &&
        std::string(e.what()).find("does not exist") != std::string::npos)
      return kExitIo;
    return kExitValidation;
  }

  try {
    if (*analyze) return cmd_analyze(config, ref_config, input_size, nc, format);
    if (*init) return cmd_init_weights(config, out, nc, seed, zero, f16, fold);
    if (*fwd)
      return cmd_forward(config, weights, image, out, nc, input_size, conf, nms_iou, bench,
                         bench_runs, format);
    if (*gc) return cmd_gradcheck(target, seed, corrupt);
    if (*toy) return cmd_train_toy(steps, lr, seed, trace, format);
    if (*ev) return cmd_eval(dets_dir, labels_dir, img_size, nc, report_conf, format);
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitValidation;
}
