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

#include "roc/roc.h"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <sstream>

#include "roc/analysis.hpp"
#include "roc/io.hpp"
#include "roc/model.hpp"
#include "roc/postprocess.hpp"
#include "roc/trainer.hpp"

struct roc_model {
  roc::ModelGraph graph;
  std::optional<roc::WeightStore> weights;
};

namespace {

thread_local std::string g_last_error;

roc_status to_status(roc::ErrorCode c) {
  switch (c) {
    case roc::ErrorCode::kShape: return ROC_ERR_SHAPE;
    case roc::ErrorCode::kInvalidArgument: return ROC_ERR_INVALID_ARGUMENT;
    case roc::ErrorCode::kIo: return ROC_ERR_IO;
    case roc::ErrorCode::kFormat: return ROC_ERR_FORMAT;
    case roc::ErrorCode::kMissingWeight: return ROC_ERR_MISSING_WEIGHT;
    case roc::ErrorCode::kUnsupported: return ROC_ERR_UNSUPPORTED;
  }
  return ROC_ERR_INTERNAL;
}

template <class Fn>
roc_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return ROC_OK;
  } catch (const roc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ROC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ROC_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) roc::fail(roc::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

roc::ModelGraph graph_from_config(roc::ModelConfig cfg, int nc) {
  if (nc > 0) cfg.nc = nc;
  return roc::build_graph(cfg);
}

const roc::WeightStore& weights_of(const roc_model* m) {
  require(m->weights.has_value(), "model has no weights (init or load them first)");
  return *m->weights;
}

roc_detection to_c(const roc::Detection& d) {
  return {d.cls, d.conf, d.box.x1, d.box.y1, d.box.x2, d.box.y2};
}

roc::Detection from_c(const roc_detection& d) {
  return {d.cls, d.conf, roc::BBox{d.x1, d.y1, d.x2, d.y2}};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

extern "C" {

const char* roc_last_error(void) { return g_last_error.c_str(); }

const char* roc_status_name(roc_status status) {
  switch (status) {
    case ROC_OK: return "ok";
    case ROC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ROC_ERR_SHAPE: return "shape error";
    case ROC_ERR_IO: return "i/o error";
    case ROC_ERR_FORMAT: return "format error";
    case ROC_ERR_MISSING_WEIGHT: return "missing weight";
    case ROC_ERR_UNSUPPORTED: return "unsupported";
    case ROC_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* roc_version(void) { return "0.1.0"; }

void roc_string_free(char* s) { std::free(s); }

// ---- models ----------------------------------------------------------------

roc_status roc_model_from_config_file(const char* path, int nc, roc_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto m = std::make_unique<roc_model>();
    m->graph = graph_from_config(roc::load_config(path), nc);
    *out = m.release();
  });
}

roc_status roc_model_from_config_text(const char* text, int nc, roc_model** out) {
  return guarded([&] {
    require(text && out, "null argument");
    auto m = std::make_unique<roc_model>();
    m->graph = graph_from_config(roc::parse_config(text), nc);
    *out = m.release();
  });
}

roc_status roc_model_from_preset(const char* name, int nc, roc_model** out) {
  return guarded([&] {
    require(name && out, "null argument");
    const std::string n = name;
    roc::ModelConfig cfg;
    if (n == "baseline") cfg.compression = roc::baseline_policy();
    else if (n == "roc") cfg.compression = roc::roc_policy(512);
    else if (n == "roc_1024") cfg.compression = roc::roc_policy(1024), cfg.compression.name = n;
    else if (n == "roc_256") cfg.compression = roc::roc_policy(256), cfg.compression.name = n;
    else if (n == "roc_128") cfg.compression = roc::roc_policy(128), cfg.compression.name = n;
    else if (n == "roc_eq10") cfg.compression = roc::roc_eq10_policy();
    else roc::fail(roc::ErrorCode::kInvalidArgument, "unknown preset '" + n + "'");
    auto m = std::make_unique<roc_model>();
    m->graph = graph_from_config(cfg, nc > 0 ? nc : 4);
    *out = m.release();
  });
}

void roc_model_free(roc_model* model) { delete model; }

roc_status roc_model_config_text(const roc_model* model, char** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = dup_string(roc::serialize_config(model->graph.config));
  });
}

roc_status roc_model_summary(const roc_model* model, char** out) {
  return guarded([&] {
    require(model && out, "null argument");
    std::ostringstream os;
    for (size_t i = 0; i < model->graph.nodes.size(); ++i) {
      const roc::BlockSpec& b = model->graph.nodes[i];
      os << i << " " << b.name << " " << roc::block_kind_name(b.kind) << " in=";
      for (size_t k = 0; k < b.inputs.size(); ++k) os << (k ? "," : "") << b.inputs[k];
      os << " c_out=" << b.c_out;
      if (b.kind == roc::BlockKind::kC2f) os << " n=" << b.repeats;
      os << " stride=" << b.feature_stride << "\n";
    }
    *out = dup_string(os.str());
  });
}

int roc_model_num_classes(const roc_model* model) { return model ? model->graph.nc() : 0; }

int roc_model_num_nodes(const roc_model* model) {
  return model ? int(model->graph.nodes.size()) : 0;
}

// ---- analysis --------------------------------------------------------------

roc_status roc_analyze(const roc_model* model, int input_h, int input_w, roc_cost* out) {
  return guarded([&] {
    require(model && out, "null argument");
    const roc::CostReport r = roc::analyze(model->graph, input_h, input_w);
    *out = {r.params, r.flops, r.size_bytes_f16, r.size_bytes_f32};
  });
}

roc_status roc_analyze_report(const roc_model* model, const roc_model* ref, int input_h,
                              int input_w, int kv, char** out) {
  return guarded([&] {
    require(model && out, "null argument");
    roc::CostReport r = roc::analyze(model->graph, input_h, input_w);
    r.label = model->graph.config.compression.name;
    std::string s = kv ? roc::format_report_kv(r) : roc::format_report_text(r);
    if (ref) {
      roc::CostReport rr = roc::analyze(ref->graph, input_h, input_w);
      rr.label = ref->graph.config.compression.name;
      const roc::CostDiff d = roc::diff_reports(rr, r);
      if (kv) {
        s += "ref.params=" + std::to_string(rr.params) + "\n";
        s += "ref.flops=" + std::to_string(rr.flops) + "\n";
        s += roc::format_diff_kv(d);
      } else {
        s += "\n" + roc::format_diff_text(rr, r, d);
      }
    }
    *out = dup_string(s);
  });
}

// ---- weights ---------------------------------------------------------------

roc_status roc_model_init_weights(roc_model* model, int mode, uint64_t seed) {
  return guarded([&] {
    require(model, "null argument");
    require(mode == ROC_INIT_RANDOM || mode == ROC_INIT_ZERO, "unknown init mode");
    model->weights = roc::init_weights(
        model->graph, mode == ROC_INIT_ZERO ? roc::InitMode::kZero : roc::InitMode::kRandom,
        seed);
  });
}

roc_status roc_model_load_weights(roc_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    roc::WeightStore w = roc::load_weights(path);
    roc::check_weights(model->graph, w);
    model->weights = std::move(w);
  });
}

roc_status roc_model_save_weights(const roc_model* model, const char* path, int f16) {
  return guarded([&] {
    require(model && path, "null argument");
    roc::save_weights(weights_of(model), path,
                      f16 ? roc::WeightDtype::kF16 : roc::WeightDtype::kF32);
  });
}

roc_status roc_model_fold_batchnorm(roc_model* model) {
  return guarded([&] {
    require(model, "null argument");
    model->weights = roc::fold_batchnorm(model->graph, weights_of(model));
  });
}

int64_t roc_model_weight_elements(const roc_model* model) {
  return model && model->weights ? model->weights->total_elements() : 0;
}

// ---- inference -------------------------------------------------------------

roc_detect_options roc_detect_defaults(void) { return {640, 0.25, 0.45, 300}; }

roc_status roc_forward(const roc_model* model, const float* image, int n, int h, int w,
                       float* maps[3], int64_t shapes[3][4]) {
  return guarded([&] {
    require(model && image && maps && shapes, "null argument");
    require(n > 0 && h > 0 && w > 0, "image extents must be positive");
    roc::TensorF x(roc::Shape{n, 3, h, w},
                   std::vector<float>(image, image + int64_t(n) * 3 * h * w));
    const std::vector<roc::TensorF> out = roc::forward(model->graph, weights_of(model), x);
    std::array<float*, 3> bufs{};
    try {
      for (size_t i = 0; i < 3; ++i) {
        bufs[i] = static_cast<float*>(std::malloc(size_t(out[i].numel()) * sizeof(float)));
        if (!bufs[i]) throw std::bad_alloc();
        std::copy_n(out[i].ptr(), out[i].numel(), bufs[i]);
      }
    } catch (...) {
      for (float* b : bufs) std::free(b);
      throw;
    }
    for (size_t i = 0; i < 3; ++i) {
      maps[i] = bufs[i];
      for (int k = 0; k < 4; ++k) shapes[i][k] = out[i].shape()[k];
    }
  });
}

void roc_buffer_free(float* buffer) { std::free(buffer); }

roc_status roc_detect_ppm(const roc_model* model, const char* ppm_path,
                          const roc_detect_options* opt, roc_detection** dets, size_t* count,
                          roc_timing* timing) {
  return guarded([&] {
    require(model && ppm_path && dets && count, "null argument");
    const roc_detect_options o = opt ? *opt : roc_detect_defaults();
    require(o.input_size > 0 && o.input_size % 32 == 0, "input size must be a multiple of 32");
    require(o.conf >= 0 && o.conf <= 1, "confidence threshold must lie in [0, 1]");
    require(o.nms_iou >= 0 && o.nms_iou <= 1, "NMS IoU threshold must lie in [0, 1]");
    const roc::WeightStore& w = weights_of(model);

    auto t0 = std::chrono::steady_clock::now();
    const roc::TensorF img = roc::read_image_ppm(ppm_path);
    const roc::LetterboxResult lb = roc::letterbox(img, o.input_size, o.input_size);
    const double pre_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    const std::vector<roc::TensorF> maps = roc::forward(model->graph, w, lb.image);
    const double inf_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    roc::DecodeOptions d;
    d.conf_threshold = o.conf;
    d.reg_max = model->graph.reg_max();
    d.strides = model->graph.strides;
    const auto decoded = roc::decode(maps, d, {lb.inverse});
    const std::vector<roc::Detection> kept =
        roc::nms(decoded[0], o.nms_iou, o.max_det > 0 ? size_t(o.max_det) : 0);
    const double post_ms = ms_since(t0);

    auto* out = static_cast<roc_detection*>(
        std::malloc(std::max<size_t>(1, kept.size()) * sizeof(roc_detection)));
    if (!out) throw std::bad_alloc();
    for (size_t i = 0; i < kept.size(); ++i) out[i] = to_c(kept[i]);
    *dets = out;
    *count = kept.size();
    if (timing) *timing = {pre_ms, inf_ms, post_ms};
  });
}

void roc_detections_free(roc_detection* dets) { std::free(dets); }

roc_status roc_write_detections(const char* path, const roc_detection* dets, size_t count) {
  return guarded([&] {
    require(path && (dets || count == 0), "null argument");
    std::vector<roc::Detection> v;
    for (size_t i = 0; i < count; ++i) v.push_back(from_c(dets[i]));
    roc::write_detections(v, path);
  });
}

// ---- evaluation ------------------------------------------------------------

roc_status roc_evaluate_dirs(const char* dets_dir, const char* labels_dir, int img_w,
                             int img_h, int nc, double report_conf, int kv,
                             roc_eval_summary* out, char** report) {
  return guarded([&] {
    namespace fs = std::filesystem;
    require(dets_dir && labels_dir, "null argument");
    require(img_w > 0 && img_h > 0, "image size must be positive");
    require(nc > 0, "class count must be positive");
    for (const char* d : {dets_dir, labels_dir})
      if (!fs::is_directory(d))
        roc::fail(roc::ErrorCode::kIo, std::string("not a directory: ") + d);
    std::map<std::string, std::pair<fs::path, fs::path>> stems;
    for (const auto& e : fs::directory_iterator(labels_dir))
      if (e.path().extension() == ".txt") stems[e.path().stem().string()].second = e.path();
    for (const auto& e : fs::directory_iterator(dets_dir))
      if (e.path().extension() == ".txt") stems[e.path().stem().string()].first = e.path();

    std::vector<std::vector<roc::Detection>> dets;
    std::vector<std::vector<roc::GroundTruth>> truths;
    for (const auto& [stem, paths] : stems) {
      dets.push_back(paths.first.empty() ? std::vector<roc::Detection>{}
                                         : roc::read_detections(paths.first.string()));
      std::vector<roc::GroundTruth> t;
      if (!paths.second.empty())
        for (const auto& r : roc::read_labels(paths.second.string(), nc))
          t.push_back(roc::label_to_truth(r, img_w, img_h));
      truths.push_back(std::move(t));
    }
    roc::EvalOptions eo;
    eo.report_conf = report_conf;
    const roc::EvalReport rep = roc::evaluate(dets, truths, nc, eo);
    if (out)
      *out = {rep.precision, rep.recall, rep.map50, rep.map50_95, rep.tp, rep.fp, rep.fn,
              int(stems.size())};
    if (report) {
      std::ostringstream os;
      char line[200];
      if (kv) {
        os << "images=" << stems.size() << "\n";
        std::snprintf(line, sizeof(line),
                      "precision=%.6f\nrecall=%.6f\nmap50=%.6f\nmap50_95=%.6f\n", rep.precision,
                      rep.recall, rep.map50, rep.map50_95);
        os << line << "tp=" << rep.tp << "\nfp=" << rep.fp << "\nfn=" << rep.fn << "\n";
        for (const auto& c : rep.per_class) {
          std::snprintf(line, sizeof(line), "class.%s=%lld,%.6f,%.6f\n",
                        roc::class_name(c.cls, nc).c_str(), (long long)c.truths, c.ap50(),
                        c.ap50_95());
          os << line;
        }
      } else {
        os << "images: " << stems.size() << "\n";
        std::snprintf(line, sizeof(line), "%-8s %8s %8s %10s\n", "class", "truths", "AP50",
                      "AP50:95");
        os << line;
        for (const auto& c : rep.per_class) {
          std::snprintf(line, sizeof(line), "%-8s %8lld %8.4f %10.4f\n",
                        roc::class_name(c.cls, nc).c_str(), (long long)c.truths, c.ap50(),
                        c.ap50_95());
          os << line;
        }
        std::snprintf(line, sizeof(line),
                      "P %.4f  R %.4f  mAP50 %.4f  mAP50:95 %.4f  (TP %lld FP %lld FN %lld)\n",
                      rep.precision, rep.recall, rep.map50, rep.map50_95, (long long)rep.tp,
                      (long long)rep.fp, (long long)rep.fn);
        os << line;
      }
      *report = dup_string(os.str());
    }
  });
}

// ---- mechanism checks ------------------------------------------------------

roc_status roc_gradcheck(const char* target, uint64_t seed, int corrupt, int* passed,
                         char** report) {
  return guarded([&] {
    require(target && passed, "null argument");
    roc::GradcheckOptions o;
    o.seed = seed;
    if (corrupt) o.corrupt = roc::OpKind::kSigmoid;
    const roc::GradcheckReport r = roc::gradcheck(roc::parse_grad_target(target), o);
    *passed = r.passed ? 1 : 0;
    if (report) *report = dup_string(roc::format_gradcheck(r));
  });
}

roc_status roc_train_toy(int steps, double lr, uint64_t seed, const char* trace_path,
                         roc_toy_result* out) {
  return guarded([&] {
    require(out, "null argument");
    roc::ToyOptions o;
    o.steps = steps;
    o.lr = lr;
    o.seed = seed;
    const roc::ToyResult r = roc::overfit_toy(o);
    if (trace_path) roc::write_file(trace_path, roc::format_trace(r.losses));
    *out = {r.initial, r.final_loss, r.reduction, r.accuracy, int(r.losses.size()),
            r.diverged_step};
  });
}

}  // extern "C"
