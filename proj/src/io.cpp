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

#include "roc/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace roc {

// ---- files -----------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "error writing '" + path + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void format_error(int line, const std::string& msg) {
  fail(ErrorCode::kFormat, "line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& v, int line) {
  const auto slash = v.find('/');
  try {
    size_t used = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(trim(v.substr(0, slash)), &used);
      const double den = std::stod(trim(v.substr(slash + 1)));
      if (den == 0) format_error(line, "zero denominator in '" + v + "'");
      return num / den;
    }
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    format_error(line, "expected a number, got '" + v + "'");
  }
}

int64_t parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    format_error(line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  format_error(line, "expected true or false, got '" + v + "'");
}

template <size_t N, typename T>
void parse_list(const std::string& v, int line, std::array<T, N>& out) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  if (parts.size() != N)
    format_error(line, "expected " + std::to_string(N) + " comma-separated values, got '" +
                           v + "'");
  for (size_t i = 0; i < N; ++i) out[i] = T(parse_int(parts[i], line));
}

template <size_t N, typename T>
std::string join(const std::array<T, N>& a) {
  std::string s;
  for (size_t i = 0; i < N; ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s;
}

std::string real_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---- config ----------------------------------------------------------------

ModelConfig parse_config(const std::string& text) {
  ModelConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') format_error(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "scale" && section != "compression" && section != "bms_sppf" &&
          section != "detect")
        format_error(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) format_error(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string v = trim(s.substr(eq + 1));
    if (section.empty()) format_error(line, "key '" + key + "' outside a section");
    auto& sc = cfg.scale;
    auto& cp = cfg.compression;
    auto& bm = cfg.bms;
    const std::string k = section + "." + key;
    if (k == "scale.depth") sc.depth = parse_real(v, line);
    else if (k == "scale.width") sc.width = parse_real(v, line);
    else if (k == "scale.max_channels") sc.max_channels = parse_int(v, line);
    else if (k == "scale.divisor") sc.divisor = parse_int(v, line);
    else if (k == "compression.name") cp.name = v;
    else if (k == "compression.nominal_max_channels") cp.nominal_max_channels = parse_int(v, line);
    else if (k == "compression.backbone_repeats") parse_list(v, line, cp.backbone_repeats);
    else if (k == "compression.head_repeats") cp.head_repeats = int(parse_int(v, line));
    else if (k == "compression.head_channels") parse_list(v, line, cp.head_channels);
    else if (k == "compression.bms_sppf") cp.bms_sppf = parse_bool(v, line);
    else if (k == "bms_sppf.pool_kernel") bm.pool_kernel = int(parse_int(v, line));
    else if (k == "bms_sppf.mssa_kernels") parse_list(v, line, bm.mssa.kernels);
    else if (k == "bms_sppf.gate_groups") bm.mssa.gate_groups = int(parse_int(v, line));
    else if (k == "bms_sppf.cap") {
      try {
        bm.cap.strategy = parse_cap_strategy(v);
      } catch (const Error& e) {
        format_error(line, e.what());
      }
    }
    else if (k == "bms_sppf.cap_block") bm.cap.block = int(parse_int(v, line));
    else if (k == "bms_sppf.cap_norm_groups") bm.cap.norm_groups = int(parse_int(v, line));
    else if (k == "bms_sppf.heads") bm.mhsa.heads = int(parse_int(v, line));
    else if (k == "bms_sppf.qkv_groups") bm.mhsa.qkv_groups = int(parse_int(v, line));
    else if (k == "bms_sppf.qkv_bias") bm.mhsa.qkv_bias = parse_bool(v, line);
    else if (k == "bms_sppf.bypass_channel_gate") bm.bypass_channel_gate = parse_bool(v, line);
    else if (k == "detect.nc") cfg.nc = int(parse_int(v, line));
    else if (k == "detect.reg_max") cfg.reg_max = int(parse_int(v, line));
    else format_error(line, "unknown key '" + key + "' in [" + section + "]");
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_config(text);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_config(const ModelConfig& cfg) {
  std::ostringstream os;
  const auto& sc = cfg.scale;
  const auto& cp = cfg.compression;
  const auto& bm = cfg.bms;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[scale]\n"
     << "depth = " << real_str(sc.depth) << "\n"
     << "width = " << real_str(sc.width) << "\n"
     << "max_channels = " << sc.max_channels << "\n"
     << "divisor = " << sc.divisor << "\n\n"
     << "[compression]\n"
     << "name = " << cp.name << "\n"
     << "nominal_max_channels = " << cp.nominal_max_channels << "\n"
     << "backbone_repeats = " << join(cp.backbone_repeats) << "\n"
     << "head_repeats = " << cp.head_repeats << "\n"
     << "head_channels = " << join(cp.head_channels) << "\n"
     << "bms_sppf = " << b(cp.bms_sppf) << "\n\n"
     << "[bms_sppf]\n"
     << "pool_kernel = " << bm.pool_kernel << "\n"
     << "mssa_kernels = " << join(bm.mssa.kernels) << "\n"
     << "gate_groups = " << bm.mssa.gate_groups << "\n"
     << "cap = " << cap_strategy_name(bm.cap.strategy) << "\n"
     << "cap_block = " << bm.cap.block << "\n"
     << "cap_norm_groups = " << bm.cap.norm_groups << "\n"
     << "heads = " << bm.mhsa.heads << "\n"
     << "qkv_groups = " << bm.mhsa.qkv_groups << "\n"
     << "qkv_bias = " << b(bm.mhsa.qkv_bias) << "\n"
     << "bypass_channel_gate = " << b(bm.bypass_channel_gate) << "\n\n"
     << "[detect]\n"
     << "nc = " << cfg.nc << "\n"
     << "reg_max = " << cfg.reg_max << "\n";
  return os.str();
}

void save_config(const ModelConfig& cfg, const std::string& path) {
  write_file(path, serialize_config(cfg));
}

// ---- half precision ----------------------------------------------------------

uint16_t float_to_half(float f) {
  const auto x = std::bit_cast<uint32_t>(f);
  const uint16_t sign = uint16_t((x >> 16) & 0x8000u);
  const uint32_t exp = (x >> 23) & 0xffu;
  uint32_t man = x & 0x7fffffu;
  if (exp == 0xff) return uint16_t(sign | 0x7c00u | (man ? 0x200u : 0u));
  const int e = int(exp) - 127 + 15;
  if (e >= 31) return uint16_t(sign | 0x7c00u);
  if (e <= 0) {
    if (e < -10) return sign;
    man |= 0x800000u;
    const int shift = 14 - e;
    uint32_t h = man >> shift;
    const uint32_t rem = man & ((1u << shift) - 1);
    const uint32_t half = 1u << (shift - 1);
    if (rem > half || (rem == half && (h & 1u))) ++h;
    return uint16_t(sign | h);
  }
  uint32_t h = (uint32_t(e) << 10) | (man >> 13);
  const uint32_t rem = man & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) ++h;  // may carry into the exponent
  return uint16_t(sign | h);
}

float half_to_float(uint16_t h) {
  const uint32_t sign = uint32_t(h & 0x8000u) << 16;
  const uint32_t exp = (h >> 10) & 0x1fu;
  uint32_t man = h & 0x3ffu;
  uint32_t x;
  if (exp == 0) {
    if (man == 0) {
      x = sign;
    } else {
      int e = -1;
      do {
        ++e;
        man <<= 1;
      } while (!(man & 0x400u));
      x = sign | (uint32_t(127 - 15 - e) << 23) | ((man & 0x3ffu) << 13);
    }
  } else if (exp == 0x1f) {
    x = sign | 0x7f800000u | (man << 13);
  } else {
    x = sign | ((exp - 15 + 127) << 23) | (man << 13);
  }
  return std::bit_cast<float>(x);
}

// ---- weights -----------------------------------------------------------------

namespace {

template <typename U>
void put(std::string& out, U v) {
  for (size_t i = 0; i < sizeof(U); ++i) out.push_back(char((uint64_t(v) >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n, const char* what) {
    if (buf.size() - pos < n)
      fail(ErrorCode::kFormat, std::string("weights file truncated reading ") + what);
  }
  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(U); ++i)
      v |= uint64_t(uint8_t(buf[pos + i])) << (8 * i);
    pos += sizeof(U);
    return U(v);
  }
};

}  // namespace

std::string encode_weights(const WeightStore& w, WeightDtype dtype) {
  std::string out(kWeightsMagic, 4);
  put<uint32_t>(out, kWeightsVersion);
  put<uint32_t>(out, uint32_t(w.size()));
  for (const auto& [name, t] : w.entries()) {
    check(name.size() <= 0xffff, ErrorCode::kInvalidArgument, "slot name too long: " + name);
    put<uint16_t>(out, uint16_t(name.size()));
    out += name;
    put<uint8_t>(out, uint8_t(dtype));
    put<uint8_t>(out, uint8_t(t.shape().rank()));
    for (int64_t d : t.shape().dims()) put<uint32_t>(out, uint32_t(d));
    for (float v : t.data()) {
      if (dtype == WeightDtype::kF32) put<uint32_t>(out, std::bit_cast<uint32_t>(v));
      else put<uint16_t>(out, float_to_half(v));
    }
  }
  return out;
}

WeightStore decode_weights(const std::string& bytes) {
  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kWeightsMagic, 4) != 0)
    fail(ErrorCode::kFormat, "not a weights file (bad magic)");
  r.pos = 4;
  const auto version = r.get<uint32_t>("version");
  if (version != kWeightsVersion)
    fail(ErrorCode::kFormat, "unsupported weights version " + std::to_string(version));
  const auto count = r.get<uint32_t>("record count");
  WeightStore w;
  for (uint32_t i = 0; i < count; ++i) {
    const auto len = r.get<uint16_t>("name length");
    r.need(len, "name");
    std::string name = bytes.substr(r.pos, len);
    r.pos += len;
    const auto dtype = r.get<uint8_t>("dtype");
    if (dtype > 1) fail(ErrorCode::kFormat, "unknown dtype " + std::to_string(dtype) + " for " + name);
    const auto rank = r.get<uint8_t>("rank");
    if (rank < 1 || rank > 4)
      fail(ErrorCode::kFormat, "bad rank " + std::to_string(rank) + " for " + name);
    std::vector<int64_t> dims;
    for (int k = 0; k < rank; ++k) {
      const auto d = r.get<uint32_t>("extent");
      if (d == 0) fail(ErrorCode::kFormat, "zero extent in " + name);
      dims.push_back(d);
    }
    const Shape shape(dims);
    const size_t esz = dtype == 0 ? 4 : 2;
    r.need(size_t(shape.numel()) * esz, "payload");
    TensorF t(shape);
    for (auto& v : t.data())
      v = dtype == 0 ? std::bit_cast<float>(r.get<uint32_t>("payload"))
                     : half_to_float(r.get<uint16_t>("payload"));
    if (w.contains(name)) fail(ErrorCode::kFormat, "duplicate slot " + name);
    w.set(name, std::move(t));
  }
  if (r.pos != bytes.size()) fail(ErrorCode::kFormat, "trailing bytes after last record");
  return w;
}

void save_weights(const WeightStore& w, const std::string& path, WeightDtype dtype) {
  write_file(path, encode_weights(w, dtype));
}

WeightStore load_weights(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_weights(bytes);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

// ---- labels ------------------------------------------------------------------

std::vector<LabelRecord> parse_labels(const std::string& text, int nc) {
  constexpr double kEps = 1e-6;
  std::vector<LabelRecord> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.size() != 5) format_error(line, "expected 'class cx cy w h'");
    LabelRecord r;
    const int64_t cls = parse_int(tok[0], line);
    if (cls < 0 || cls >= nc)
      format_error(line, "class " + tok[0] + " out of range [0, " + std::to_string(nc) + ")");
    r.cls = int(cls);
    r.cx = parse_real(tok[1], line);
    r.cy = parse_real(tok[2], line);
    r.w = parse_real(tok[3], line);
    r.h = parse_real(tok[4], line);
    for (double v : {r.cx, r.cy, r.w, r.h})
      if (!(v >= 0.0 && v <= 1.0)) format_error(line, "coordinate outside [0, 1]");
    if (r.cx - r.w / 2 < -kEps || r.cx + r.w / 2 > 1 + kEps || r.cy - r.h / 2 < -kEps ||
        r.cy + r.h / 2 > 1 + kEps)
      format_error(line, "box extends outside the unit square");
    out.push_back(r);
  }
  return out;
}

std::vector<LabelRecord> read_labels(const std::string& path, int nc) {
  const std::string text = read_file(path);
  try {
    return parse_labels(text, nc);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void write_labels(const std::vector<LabelRecord>& labels, const std::string& path) {
  std::string s;
  char buf[160];
  for (const LabelRecord& r : labels) {
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", r.cls, r.cx, r.cy, r.w, r.h);
    s += buf;
  }
  write_file(path, s);
}

GroundTruth label_to_truth(const LabelRecord& r, double img_w, double img_h) {
  return {r.cls, BBox{(r.cx - r.w / 2) * img_w, (r.cy - r.h / 2) * img_h,
                      (r.cx + r.w / 2) * img_w, (r.cy + r.h / 2) * img_h}};
}

// ---- images ------------------------------------------------------------------

TensorF decode_ppm(const std::string& bytes) {
  size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(uint8_t(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const size_t start = pos;
    while (pos < bytes.size() && !std::isspace(uint8_t(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P6") fail(ErrorCode::kFormat, "not a binary PPM (bad magic)");
  int64_t dims[3];
  for (int64_t& d : dims) {
    const std::string t = token();
    try {
      size_t used = 0;
      d = std::stoll(t, &used);
      if (used != t.size() || d <= 0) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat, "bad PPM header field '" + t + "'");
    }
  }
  if (dims[2] != 255) fail(ErrorCode::kFormat, "PPM maxval must be 255");
  ++pos;  // single whitespace before the raster
  const int64_t W = dims[0], H = dims[1];
  if (pos > bytes.size() || int64_t(bytes.size() - pos) < W * H * 3)
    fail(ErrorCode::kFormat, "PPM payload truncated");
  TensorF img(Shape{1, 3, H, W});
  const auto* px = reinterpret_cast<const uint8_t*>(bytes.data() + pos);
  for (int64_t i = 0; i < H * W; ++i)
    for (int64_t c = 0; c < 3; ++c) img[c * H * W + i] = float(px[i * 3 + c]) / 255.0f;
  return img;
}

TensorF read_image_ppm(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_ppm(bytes);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string encode_ppm(const TensorF& image) {
  const Shape& s = image.shape();
  check(s.rank() == 4 && s[0] == 1 && s[1] == 3, ErrorCode::kShape,
        "encode_ppm: expected (1, 3, H, W), got " + s.str());
  const int64_t H = s[2], W = s[3];
  std::string out = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  for (int64_t i = 0; i < H * W; ++i)
    for (int64_t c = 0; c < 3; ++c) {
      const float v = std::clamp(image[c * H * W + i], 0.0f, 1.0f);
      out.push_back(char(uint8_t(std::lround(v * 255.0f))));
    }
  return out;
}

void write_image_ppm(const TensorF& image, const std::string& path) {
  write_file(path, encode_ppm(image));
}

TensorF resize_bilinear(const TensorF& image, int64_t out_h, int64_t out_w) {
  const Shape& s = image.shape();
  check(s.rank() == 4 && out_h > 0 && out_w > 0, ErrorCode::kShape,
        "resize_bilinear: bad input " + s.str());
  const int64_t N = s[0], C = s[1], H = s[2], W = s[3];
  if (H == out_h && W == out_w) return image;
  TensorF out(Shape{N, C, out_h, out_w});
  const double sy = double(H) / double(out_h), sx = double(W) / double(out_w);
  struct Tap {
    int64_t i0, i1;
    float f;
  };
  auto taps = [](int64_t n_out, int64_t n_in, double scale) {
    std::vector<Tap> t(static_cast<size_t>(n_out));
    for (int64_t o = 0; o < n_out; ++o) {
      const double src = std::max(0.0, (double(o) + 0.5) * scale - 0.5);
      const auto i0 = std::min(int64_t(src), n_in - 1);
      const int64_t i1 = std::min(i0 + 1, n_in - 1);
      t[size_t(o)] = {i0, i1, float(src - double(i0))};
    }
    return t;
  };
  const auto ty = taps(out_h, H, sy), tx = taps(out_w, W, sx);
  for (int64_t p = 0; p < N * C; ++p) {
    const float* src = image.ptr() + p * H * W;
    float* dst = out.ptr() + p * out_h * out_w;
    for (int64_t y = 0; y < out_h; ++y) {
      const Tap& a = ty[size_t(y)];
      const float* r0 = src + a.i0 * W;
      const float* r1 = src + a.i1 * W;
      for (int64_t x = 0; x < out_w; ++x) {
        const Tap& b = tx[size_t(x)];
        const float top = r0[b.i0] + (r0[b.i1] - r0[b.i0]) * b.f;
        const float bot = r1[b.i0] + (r1[b.i1] - r1[b.i0]) * b.f;
        dst[y * out_w + x] = top + (bot - top) * a.f;
      }
    }
  }
  return out;
}

LetterboxResult letterbox(const TensorF& image, int64_t target_h, int64_t target_w) {
  const Shape& s = image.shape();
  check(s.rank() == 4 && s[0] == 1, ErrorCode::kShape,
        "letterbox: expected a single (1, C, H, W) image, got " + s.str());
  const int64_t C = s[1], H = s[2], W = s[3];
  const double r = std::min(double(target_h) / double(H), double(target_w) / double(W));
  const int64_t nw = std::lround(double(W) * r), nh = std::lround(double(H) * r);
  const double dw = double(target_w - nw) / 2, dh = double(target_h - nh) / 2;
  const int64_t top = std::lround(dh - 0.1), left = std::lround(dw - 0.1);
  const TensorF resized = resize_bilinear(image, nh, nw);
  LetterboxResult res;
  res.image = TensorF(Shape{1, C, target_h, target_w}, kLetterboxFill);
  for (int64_t c = 0; c < C; ++c)
    for (int64_t y = 0; y < nh; ++y)
      std::copy_n(resized.ptr() + (c * nh + y) * nw, nw,
                  res.image.ptr() + (c * target_h + y + top) * target_w + left);
  res.inverse = Letterbox{r, double(left), double(top), W, H};
  return res;
}

// ---- detections --------------------------------------------------------------

std::string format_detections(std::vector<Detection> dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    return a.box.x1 < b.box.x1;
  });
  std::string s;
  char buf[200];
  for (const Detection& d : dets) {
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f %.6f\n", d.cls, d.conf, d.box.x1,
                  d.box.y1, d.box.x2, d.box.y2);
    s += buf;
  }
  return s;
}

void write_detections(const std::vector<Detection>& dets, const std::string& path) {
  write_file(path, format_detections(dets));
}

std::vector<Detection> parse_detections(const std::string& text) {
  std::vector<Detection> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.size() != 6) format_error(line, "expected 'class confidence x1 y1 x2 y2'");
    Detection d;
    d.cls = int(parse_int(tok[0], line));
    d.conf = parse_real(tok[1], line);
    if (!(d.conf >= 0 && d.conf <= 1)) format_error(line, "confidence outside [0, 1]");
    d.box = {parse_real(tok[2], line), parse_real(tok[3], line), parse_real(tok[4], line),
             parse_real(tok[5], line)};
    if (!d.box.valid()) format_error(line, "box corners out of order");
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> read_detections(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_detections(text);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

}  // namespace roc
