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

#ifndef ROC_IO_HPP_
#define ROC_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "roc/model.hpp"
#include "roc/postprocess.hpp"

namespace roc {

// ---- model config ----------------------------------------------------------
//
//   [scale]        depth, width, max_channels, divisor
//   [compression]  name, nominal_max_channels, backbone_repeats (4 ints),
//                  head_repeats, head_channels (3 ints), bms_sppf
//   [bms_sppf]     pool_kernel, mssa_kernels (4 ints), gate_groups, cap,
//                  cap_block, cap_norm_groups, heads, qkv_groups, qkv_bias,
//                  bypass_channel_gate
//   [detect]       nc, reg_max
//
// Lines are "key = value"; '#' starts a comment. Omitted keys keep defaults.
// Reals also accept a fraction such as 1/3.

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);
std::string serialize_config(const ModelConfig& cfg);
void save_config(const ModelConfig& cfg, const std::string& path);

// ---- weights ---------------------------------------------------------------

enum class WeightDtype : uint8_t { kF32 = 0, kF16 = 1 };

inline constexpr char kWeightsMagic[4] = {'R', 'O', 'C', 'W'};
inline constexpr uint32_t kWeightsVersion = 1;

std::string encode_weights(const WeightStore& w, WeightDtype dtype = WeightDtype::kF32);
WeightStore decode_weights(const std::string& bytes);
void save_weights(const WeightStore& w, const std::string& path,
                  WeightDtype dtype = WeightDtype::kF32);
WeightStore load_weights(const std::string& path);

uint16_t float_to_half(float f);  // round to nearest even
float half_to_float(uint16_t h);

// ---- labels ----------------------------------------------------------------

struct LabelRecord {
  int cls = 0;
  double cx = 0, cy = 0, w = 0, h = 0;  // normalized to [0, 1]
};

std::vector<LabelRecord> parse_labels(const std::string& text, int nc);
std::vector<LabelRecord> read_labels(const std::string& path, int nc);
void write_labels(const std::vector<LabelRecord>& labels, const std::string& path);
GroundTruth label_to_truth(const LabelRecord& r, double img_w, double img_h);

// ---- images ----------------------------------------------------------------

// Binary P6 with maxval 255 -> (1, 3, H, W) in [0, 1].
TensorF decode_ppm(const std::string& bytes);
TensorF read_image_ppm(const std::string& path);
std::string encode_ppm(const TensorF& image);
void write_image_ppm(const TensorF& image, const std::string& path);

inline constexpr float kLetterboxFill = 114.0f / 255.0f;

struct LetterboxResult {
  TensorF image;  // (1, 3, target_h, target_w)
  Letterbox inverse;
};

// Aspect-preserving bilinear resize, gray padding split around the image.
LetterboxResult letterbox(const TensorF& image, int64_t target_h = 640,
                          int64_t target_w = 640);
TensorF resize_bilinear(const TensorF& image, int64_t out_h, int64_t out_w);

// ---- detections ------------------------------------------------------------

// "class confidence x1 y1 x2 y2" per line, 6 decimals, sorted by
// confidence then x1.
std::string format_detections(std::vector<Detection> dets);
void write_detections(const std::vector<Detection>& dets, const std::string& path);
std::vector<Detection> parse_detections(const std::string& text);
std::vector<Detection> read_detections(const std::string& path);

// ---- files -----------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace roc

#endif  // ROC_IO_HPP_
