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

/* C interface to the rocdet detector library.
 *
 * Every function returns a roc_status. On failure the message for the
 * calling thread is available from roc_last_error() until the next call.
 * Strings and buffers handed out by the library are released with the
 * matching *_free function.
 */
#ifndef ROC_ROC_H_
#define ROC_ROC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ROC_API __declspec(dllexport)
#else
#define ROC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum roc_status {
  ROC_OK = 0,
  ROC_ERR_INVALID_ARGUMENT = 1,
  ROC_ERR_SHAPE = 2,
  ROC_ERR_IO = 3,
  ROC_ERR_FORMAT = 4,
  ROC_ERR_MISSING_WEIGHT = 5,
  ROC_ERR_UNSUPPORTED = 6,
  ROC_ERR_INTERNAL = 7
} roc_status;

typedef struct roc_model roc_model;

ROC_API const char* roc_last_error(void);
ROC_API const char* roc_status_name(roc_status status);
ROC_API const char* roc_version(void);
ROC_API void roc_string_free(char* s);

/* ---- models ------------------------------------------------------------ */

/* nc <= 0 keeps the class count from the config. */
ROC_API roc_status roc_model_from_config_file(const char* path, int nc, roc_model** out);
ROC_API roc_status roc_model_from_config_text(const char* text, int nc, roc_model** out);
/* Presets: baseline, roc, roc_1024, roc_256, roc_128, roc_eq10. */
ROC_API roc_status roc_model_from_preset(const char* name, int nc, roc_model** out);
ROC_API void roc_model_free(roc_model* model);

ROC_API roc_status roc_model_config_text(const roc_model* model, char** out);
ROC_API roc_status roc_model_summary(const roc_model* model, char** out);
ROC_API int roc_model_num_classes(const roc_model* model);
ROC_API int roc_model_num_nodes(const roc_model* model);

/* ---- static analysis --------------------------------------------------- */

typedef struct roc_cost {
  int64_t params;
  int64_t flops;
  int64_t size_bytes_f16;
  int64_t size_bytes_f32;
} roc_cost;

ROC_API roc_status roc_analyze(const roc_model* model, int input_h, int input_w,
                               roc_cost* out);
/* Full report; ref may be NULL. kv != 0 selects key=value lines. */
ROC_API roc_status roc_analyze_report(const roc_model* model, const roc_model* ref,
                                      int input_h, int input_w, int kv, char** out);

/* ---- weights ----------------------------------------------------------- */

#define ROC_INIT_RANDOM 0
#define ROC_INIT_ZERO 1

ROC_API roc_status roc_model_init_weights(roc_model* model, int mode, uint64_t seed);
ROC_API roc_status roc_model_load_weights(roc_model* model, const char* path);
ROC_API roc_status roc_model_save_weights(const roc_model* model, const char* path, int f16);
ROC_API roc_status roc_model_fold_batchnorm(roc_model* model);
ROC_API int64_t roc_model_weight_elements(const roc_model* model);

/* ---- inference --------------------------------------------------------- */

typedef struct roc_detection {
  int cls;
  double conf;
  double x1, y1, x2, y2;
} roc_detection;

typedef struct roc_detect_options {
  int input_size;  /* square network input, multiple of 32 */
  double conf;
  double nms_iou;
  int max_det;     /* 0 keeps all */
} roc_detect_options;

typedef struct roc_timing {
  double preprocess_ms;
  double inference_ms;
  double postprocess_ms;
} roc_timing;

ROC_API roc_detect_options roc_detect_defaults(void);

/* Raw head maps for an NCHW float image batch. `maps` receives three
 * library-owned buffers (free with roc_buffer_free); `shapes` receives
 * their (N, C, H, W) extents. */
ROC_API roc_status roc_forward(const roc_model* model, const float* image, int n, int h,
                               int w, float* maps[3], int64_t shapes[3][4]);
ROC_API void roc_buffer_free(float* buffer);

/* Letterbox, forward, decode, NMS. Boxes are in source-image pixels.
 * timing may be NULL. */
ROC_API roc_status roc_detect_ppm(const roc_model* model, const char* ppm_path,
                                  const roc_detect_options* opt, roc_detection** dets,
                                  size_t* count, roc_timing* timing);
ROC_API void roc_detections_free(roc_detection* dets);
ROC_API roc_status roc_write_detections(const char* path, const roc_detection* dets,
                                        size_t count);

/* ---- evaluation -------------------------------------------------------- */

typedef struct roc_eval_summary {
  double precision;
  double recall;
  double map50;
  double map50_95;
  int64_t tp, fp, fn;
  int images;
} roc_eval_summary;

/* Pairs <stem>.txt files in both directories; labels are normalized and are
 * scaled by img_w x img_h. report may be NULL. */
ROC_API roc_status roc_evaluate_dirs(const char* dets_dir, const char* labels_dir, int img_w,
                                     int img_h, int nc, double report_conf, int kv,
                                     roc_eval_summary* out, char** report);

/* ---- mechanism checks -------------------------------------------------- */

/* target: mssa, cap, mhsa, bms or loss. corrupt != 0 runs the sign-flip
 * negative control. */
ROC_API roc_status roc_gradcheck(const char* target, uint64_t seed, int corrupt, int* passed,
                                 char** report);

typedef struct roc_toy_result {
  double initial_loss;
  double final_loss;
  double reduction;
  double accuracy;
  int steps_run;
  int diverged_step; /* -1 when finite throughout */
} roc_toy_result;

/* trace_path may be NULL. */
ROC_API roc_status roc_train_toy(int steps, double lr, uint64_t seed, const char* trace_path,
                                 roc_toy_result* out);

#ifdef __cplusplus
}
#endif

#endif /* ROC_ROC_H_ */
