#include "mvf/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "mvf/error.hpp"
#include "mvf/numeric.hpp"

namespace mvf::pipeline {

namespace {

float clamp255(double v) { return static_cast<float>(std::clamp(v, 0.0, 255.0)); }

// Negation that never produces -0.
float negate(float v) { return v == 0.0f ? 0.0f : -v; }

}  // namespace

bool SampleTensor::consistent() const {
  const std::size_t n = values.plane_size();
  for (int c = 0; c < channels(); ++c) {
    const int m = mask_of[static_cast<std::size_t>(c)];
    const float* im = m >= 0 ? values.plane(m) : nullptr;
    const float* v = values.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (kinds[static_cast<std::size_t>(c)] == ChannelKind::kIm && v[i] != 0.0f && v[i] != 1.0f) return false;
      if (im != nullptr && im[i] == 0.0f && v[i] != 0.0f) return false;
    }
  }
  return true;
}

int channel_count(Modality modality) {
  switch (modality) {
    case Modality::kRgb: return 3;
    case Modality::kMv: return 4;
    case Modality::kMvIm: return 6;
    case Modality::kRgbMvIm: return 9;
  }
  return 0;
}

std::string_view modality_name(Modality modality) {
  switch (modality) {
    case Modality::kRgb: return "rgb";
    case Modality::kMv: return "mv";
    case Modality::kMvIm: return "mv+im";
    case Modality::kRgbMvIm: return "rgb+mv+im";
  }
  return "?";
}

Modality parse_modality(std::string_view name) {
  for (Modality m : {Modality::kRgb, Modality::kMv, Modality::kMvIm, Modality::kRgbMvIm}) {
    if (name == modality_name(m)) return m;
  }
  throw FormatError("unknown modality \"" + std::string(name) + "\" (rgb, mv, mv+im, rgb+mv+im)");
}

FaceBox square_pad(const FaceBox& box, int frame_w, int frame_h) {
  if (box.w <= 0 || box.h <= 0) throw FormatError("face box must have positive area");
  if (frame_w <= 0 || frame_h <= 0) throw GeometryError("frame must have positive size");
  const int side = std::max(box.w, box.h);
  if (side > frame_w && side > frame_h) {
    throw BoxTooLarge("square of side " + std::to_string(side) + " exceeds the " + std::to_string(frame_w) + "x" +
                      std::to_string(frame_h) + " frame");
  }
  FaceBox out = box;
  out.w = std::min(side, frame_w);
  out.h = std::min(side, frame_h);
  out.x = std::clamp(box.x - (side - box.w) / 2, 0, frame_w - out.w);
  out.y = std::clamp(box.y - (side - box.h) / 2, 0, frame_h - out.h);
  return out;
}

void resample_plane(const float* src, int src_w, int src_h, double x0, double y0, double w, double h, float* dst,
                    int out_w, int out_h, Interp interp) {
  const double sx = w / out_w;
  const double sy = h / out_h;
  auto px = [&](int x, int y) { return double{src[static_cast<std::size_t>(y) * src_w + x]}; };
  for (int j = 0; j < out_h; ++j) {
    for (int i = 0; i < out_w; ++i) {
      double v;
      if (interp == Interp::kNearest) {
        const int x = std::clamp(static_cast<int>(std::floor(x0 + (i + 0.5) * sx)), 0, src_w - 1);
        const int y = std::clamp(static_cast<int>(std::floor(y0 + (j + 0.5) * sy)), 0, src_h - 1);
        v = px(x, y);
      } else {
        const double fx = std::clamp(x0 + (i + 0.5) * sx - 0.5, 0.0, double(src_w - 1));
        const double fy = std::clamp(y0 + (j + 0.5) * sy - 0.5, 0.0, double(src_h - 1));
        const int xa = static_cast<int>(fx);
        const int ya = static_cast<int>(fy);
        const int xb = std::min(xa + 1, src_w - 1);
        const int yb = std::min(ya + 1, src_h - 1);
        const double ax = fx - xa;
        const double ay = fy - ya;
        const double top = px(xa, ya) * (1 - ax) + px(xb, ya) * ax;
        const double bottom = px(xa, yb) * (1 - ax) + px(xb, yb) * ax;
        v = top * (1 - ay) + bottom * ay;
      }
      dst[static_cast<std::size_t>(j) * out_w + i] = static_cast<float>(v);
    }
  }
}

SampleTensor crop_resize(const RgbImage& frame, const FaceBox& box, int input_res) {
  if (input_res <= 0) throw GeometryError("input resolution must be positive");
  SampleTensor s;
  s.values = Tensor(3, input_res, input_res);
  s.kinds.assign(3, ChannelKind::kRgb);
  s.mask_of.assign(3, -1);
  s.degenerate.assign(3, 0);
  std::vector<float> plane(static_cast<std::size_t>(frame.width) * frame.height);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = frame.pixels[i * 3 + static_cast<std::size_t>(c)];
    resample_plane(plane.data(), frame.width, frame.height, box.x, box.y, box.w, box.h, s.values.plane(c), input_res,
                   input_res, Interp::kBilinear);
  }
  return s;
}

SampleTensor crop_resize(const motionfield::MotionField& field, const FaceBox& box, int input_res) {
  if (input_res <= 0) throw GeometryError("input resolution must be positive");
  SampleTensor s;
  s.values = Tensor(6, input_res, input_res);
  s.kinds = {ChannelKind::kMvX, ChannelKind::kMvY, ChannelKind::kMvX, ChannelKind::kMvY, ChannelKind::kIm, ChannelKind::kIm};
  s.mask_of = {4, 4, 5, 5, -1, -1};
  s.degenerate.assign(6, 0);
  const auto planes = field.plane_list();
  for (int c = 0; c < 6; ++c) {
    resample_plane(planes[static_cast<std::size_t>(c)]->data(), field.grid_w, field.grid_h, box.x / 4.0, box.y / 4.0,
                   box.w / 4.0, box.h / 4.0, s.values.plane(c), input_res, input_res,
                   c < 4 ? Interp::kBilinear : Interp::kNearest);
  }
  const std::size_t n = s.values.plane_size();
  for (int c = 0; c < 4; ++c) {
    float* v = s.values.plane(c);
    const float* im = s.values.plane(s.mask_of[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < n; ++i) {
      if (im[i] == 0.0f) v[i] = 0.0f;
    }
  }
  return s;
}

SampleTensor standardize_mv(const SampleTensor& sample) {
  SampleTensor out = sample;
  const std::size_t n = out.values.plane_size();
  for (int c = 0; c < out.channels(); ++c) {
    const auto kind = out.kinds[static_cast<std::size_t>(c)];
    if (kind != ChannelKind::kMvX && kind != ChannelKind::kMvY) continue;
    const int m = out.mask_of[static_cast<std::size_t>(c)];
    const float* im = m >= 0 ? out.values.plane(m) : nullptr;
    float* v = out.values.plane(c);
    ExactSum sum;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (im == nullptr || im[i] != 0.0f) {
        sum.add(v[i]);
        ++count;
      }
    }
    const double mean = count > 0 ? sum.value() / static_cast<double>(count) : 0.0;
    ExactSum var;
    for (std::size_t i = 0; i < n; ++i) {
      if (im == nullptr || im[i] != 0.0f) var.add((v[i] - mean) * (v[i] - mean));
    }
    const double sd = count > 0 ? std::sqrt(var.value() / static_cast<double>(count)) : 0.0;
    const bool degenerate = count == 0 || sd < 1e-8;
    out.degenerate[static_cast<std::size_t>(c)] = degenerate ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool use = im == nullptr || im[i] != 0.0f;
      v[i] = use && !degenerate ? static_cast<float>((v[i] - mean) / sd) : 0.0f;
    }
  }
  return out;
}

SampleTensor standardize_rgb(const SampleTensor& sample) {
  SampleTensor out = sample;
  const std::size_t n = out.values.plane_size();
  for (int c = 0; c < out.channels(); ++c) {
    if (out.kinds[static_cast<std::size_t>(c)] != ChannelKind::kRgb) continue;
    float* v = out.values.plane(c);
    ExactSum sum;
    for (std::size_t i = 0; i < n; ++i) sum.add(v[i]);
    const double mean = sum.value() / static_cast<double>(n);
    ExactSum var;
    for (std::size_t i = 0; i < n; ++i) var.add((v[i] - mean) * (v[i] - mean));
    const double sd = std::sqrt(var.value() / static_cast<double>(n));
    const bool degenerate = sd < 1e-8;
    out.degenerate[static_cast<std::size_t>(c)] = degenerate ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) v[i] = degenerate ? 0.0f : static_cast<float>((v[i] - mean) / sd);
  }
  return out;
}

SampleTensor flip_h(const SampleTensor& sample) {
  SampleTensor out = sample;
  const int w = out.values.width;
  for (int c = 0; c < out.channels(); ++c) {
    const bool mirror = out.kinds[static_cast<std::size_t>(c)] == ChannelKind::kMvX;
    for (int y = 0; y < out.values.height; ++y) {
      for (int x = 0; x < w; ++x) {
        const float v = sample.values.at(c, y, w - 1 - x);
        out.values.at(c, y, x) = mirror ? negate(v) : v;
      }
    }
  }
  return out;
}

SampleTensor flip_v(const SampleTensor& sample) {
  SampleTensor out = sample;
  const int h = out.values.height;
  for (int c = 0; c < out.channels(); ++c) {
    const bool mirror = out.kinds[static_cast<std::size_t>(c)] == ChannelKind::kMvY;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < out.values.width; ++x) {
        const float v = sample.values.at(c, h - 1 - y, x);
        out.values.at(c, y, x) = mirror ? negate(v) : v;
      }
    }
  }
  return out;
}

SampleTensor concat(const SampleTensor& a, const SampleTensor& b) {
  if (a.values.height != b.values.height || a.values.width != b.values.width) throw ShapeMismatch("concat of different sizes");
  SampleTensor out;
  out.values = Tensor(a.channels() + b.channels(), a.values.height, a.values.width);
  std::copy(a.values.data.begin(), a.values.data.end(), out.values.data.begin());
  std::copy(b.values.data.begin(), b.values.data.end(), out.values.data.begin() + static_cast<std::ptrdiff_t>(a.values.data.size()));
  out.kinds = a.kinds;
  out.kinds.insert(out.kinds.end(), b.kinds.begin(), b.kinds.end());
  out.mask_of = a.mask_of;
  for (int m : b.mask_of) out.mask_of.push_back(m >= 0 ? m + a.channels() : -1);
  out.degenerate = a.degenerate;
  out.degenerate.insert(out.degenerate.end(), b.degenerate.begin(), b.degenerate.end());
  return out;
}

SampleTensor drop_masks(const SampleTensor& sample) {
  std::vector<int> keep;
  std::vector<int> remap(static_cast<std::size_t>(sample.channels()), -1);
  for (int c = 0; c < sample.channels(); ++c) {
    if (sample.kinds[static_cast<std::size_t>(c)] != ChannelKind::kIm) {
      remap[static_cast<std::size_t>(c)] = static_cast<int>(keep.size());
      keep.push_back(c);
    }
  }
  SampleTensor out;
  out.values = Tensor(static_cast<int>(keep.size()), sample.values.height, sample.values.width);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    std::copy_n(sample.values.plane(keep[k]), sample.values.plane_size(), out.values.plane(static_cast<int>(k)));
    out.kinds.push_back(sample.kinds[static_cast<std::size_t>(keep[k])]);
    out.mask_of.push_back(-1);
    out.degenerate.push_back(sample.degenerate[static_cast<std::size_t>(keep[k])]);
  }
  return out;
}

SampleTensor gridmask(const SampleTensor& sample, const GridMaskParams& params) {
  if (params.period <= 0) throw FormatError("gridmask period must be positive");
  const int patch = static_cast<int>(std::lround(params.period * params.ratio));
  SampleTensor out = sample;
  if (patch <= 0) return out;
  const int d = params.period;
  auto inside = [&](int v, int offset) { return ((v - offset) % d + d) % d < patch; };
  for (int y = 0; y < out.values.height; ++y) {
    if (!inside(y, params.offset_y)) continue;
    for (int x = 0; x < out.values.width; ++x) {
      if (!inside(x, params.offset_x)) continue;
      for (int c = 0; c < out.channels(); ++c) out.values.at(c, y, x) = 0.0f;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

std::vector<int> rgb_channels(const SampleTensor& s) {
  std::vector<int> out;
  for (int c = 0; c < s.channels(); ++c) {
    if (s.kinds[static_cast<std::size_t>(c)] == ChannelKind::kRgb) out.push_back(c);
  }
  if (out.size() != 3) throw ShapeMismatch("RGB augmentation needs exactly three RGB channels");
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0 ? d / mx : 0;
  if (d == 0) {
    h = 0;
  } else if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  const double m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

}  // namespace

void add_gaussian_noise(SampleTensor& s, double sigma, Rng& rng) {
  for (int c : rgb_channels(s)) {
    float* v = s.values.plane(c);
    for (std::size_t i = 0; i < s.values.plane_size(); ++i) v[i] = clamp255(v[i] + sigma * rng.normal());
  }
}

void gaussian_blur(SampleTensor& s, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = s.values.width;
  const int h = s.values.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int c : rgb_channels(s)) {
    float* v = s.values.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * v[static_cast<std::size_t>(y) * w + std::clamp(x + t, 0, w - 1)];
        tmp[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * tmp[static_cast<std::size_t>(std::clamp(y + t, 0, h - 1)) * w + x];
        v[static_cast<std::size_t>(y) * w + x] = clamp255(acc);
      }
    }
  }
}

void brightness_contrast(SampleTensor& s, double brightness, double contrast) {
  for (int c : rgb_channels(s)) {
    float* v = s.values.plane(c);
    for (std::size_t i = 0; i < s.values.plane_size(); ++i) v[i] = clamp255(contrast * v[i] + brightness);
  }
}

void to_grayscale(SampleTensor& s) {
  const auto ch = rgb_channels(s);
  float* r = s.values.plane(ch[0]);
  float* g = s.values.plane(ch[1]);
  float* b = s.values.plane(ch[2]);
  for (std::size_t i = 0; i < s.values.plane_size(); ++i) {
    // 0.299 r + 0.587 g + 0.114 b, written so gray input maps to itself exactly.
    const double y = r[i] + 0.587 * (double{g[i]} - r[i]) + 0.114 * (double{b[i]} - r[i]);
    r[i] = g[i] = b[i] = clamp255(y);
  }
}

void channel_shift(SampleTensor& s, const double shift[3]) {
  const auto ch = rgb_channels(s);
  for (int k = 0; k < 3; ++k) {
    float* v = s.values.plane(ch[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < s.values.plane_size(); ++i) v[i] = clamp255(v[i] + shift[k]);
  }
}

void hsv_shift(SampleTensor& s, double hue_deg, double sat, double val) {
  const auto ch = rgb_channels(s);
  float* r = s.values.plane(ch[0]);
  float* g = s.values.plane(ch[1]);
  float* b = s.values.plane(ch[2]);
  for (std::size_t i = 0; i < s.values.plane_size(); ++i) {
    double h, sv, v;
    rgb_to_hsv(r[i] / 255.0, g[i] / 255.0, b[i] / 255.0, h, sv, v);
    double ro, go, bo;
    hsv_to_rgb(h + hue_deg, std::clamp(sv + sat, 0.0, 1.0), std::clamp(v + val, 0.0, 1.0), ro, go, bo);
    r[i] = clamp255(ro * 255.0);
    g[i] = clamp255(go * 255.0);
    b[i] = clamp255(bo * 255.0);
  }
}

void fancy_pca(SampleTensor& s, const double alpha[3]) {
  const auto ch = rgb_channels(s);
  const std::size_t n = s.values.plane_size();
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) mean[k] += s.values.plane(ch[static_cast<std::size_t>(k)])[i] / 255.0;
  }
  mean /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d p;
    for (int k = 0; k < 3; ++k) p[k] = s.values.plane(ch[static_cast<std::size_t>(k)])[i] / 255.0 - mean[k];
    cov += p * p.transpose();
  }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) delta += eig.eigenvectors().col(k) * (alpha[k] * eig.eigenvalues()[k]);
  for (int k = 0; k < 3; ++k) {
    float* v = s.values.plane(ch[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < n; ++i) v[i] = clamp255(v[i] + 255.0 * delta[k]);
  }
}

SampleTensor rgb_augment(const SampleTensor& sample, const AugmentationConfig& config, Rng& rng) {
  SampleTensor s = sample;
  if (rng.bernoulli(config.p_noise)) add_gaussian_noise(s, config.noise_sigma, rng);
  if (rng.bernoulli(config.p_blur)) gaussian_blur(s, config.blur_sigma);
  if (rng.bernoulli(config.p_brightness_contrast)) {
    const double b = rng.uniform(config.brightness_min, config.brightness_max);
    const double c = rng.uniform(config.contrast_min, config.contrast_max);
    brightness_contrast(s, b, c);
  }
  if (rng.bernoulli(config.p_grayscale)) to_grayscale(s);
  if (rng.bernoulli(config.p_channel_shift)) {
    double shift[3];
    for (double& v : shift) v = rng.uniform(-config.channel_shift, config.channel_shift);
    channel_shift(s, shift);
  }
  if (rng.bernoulli(config.p_hsv)) {
    const double h = rng.uniform(-config.hue_shift, config.hue_shift);
    const double sat = rng.uniform(-config.saturation_shift, config.saturation_shift);
    const double val = rng.uniform(-config.value_shift, config.value_shift);
    hsv_shift(s, h, sat, val);
  }
  if (rng.bernoulli(config.p_fancy_pca)) {
    double alpha[3];
    for (double& a : alpha) a = config.pca_scale * rng.normal();
    fancy_pca(s, alpha);
  }
  return s;
}

std::vector<int> sample_frames(int n, int k, uint64_t seed) {
  if (n < 1 || k < 1) throw FormatError("sample_frames needs n >= 1 and k >= 1");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k >= n) return idx;
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

SampleTensor build_sample(const FrameInput& input, const PreprocessConfig& config, const AugmentationConfig* augment,
                          uint64_t frame_key, bool standardize) {
  const FaceBox box = square_pad(input.box, input.frame_w, input.frame_h);
  Rng rng(derive_seed(augment != nullptr ? augment->seed : 0, frame_key));
  const bool want_rgb = config.modality == Modality::kRgb || config.modality == Modality::kRgbMvIm;
  const bool want_mv = config.modality != Modality::kRgb;

  SampleTensor rgb;
  if (want_rgb) {
    if (input.frame == nullptr) throw MissingFrame("RGB modality needs a frame");
    rgb = crop_resize(*input.frame, box, config.input_res);
    if (augment != nullptr) rgb = rgb_augment(rgb, *augment, rng);
    if (standardize) rgb = standardize_rgb(rgb);
  }
  SampleTensor mv;
  if (want_mv) {
    if (input.field == nullptr) throw MissingFrame("motion modality needs a motion field");
    mv = config.past_only ? crop_resize(motionfield::select_past_only(*input.field), box, config.input_res)
                          : crop_resize(*input.field, box, config.input_res);
    if (standardize) mv = standardize_mv(mv);
    if (config.modality == Modality::kMv) mv = drop_masks(mv);
  }
  SampleTensor s = want_rgb && want_mv ? concat(rgb, mv) : want_rgb ? std::move(rgb) : std::move(mv);

  if (augment != nullptr) {
    if (rng.bernoulli(augment->p_flip_h)) s = flip_h(s);
    if (rng.bernoulli(augment->p_flip_v)) s = flip_v(s);
    if (rng.bernoulli(augment->p_gridmask)) {
      GridMaskParams gm{augment->gridmask_period, augment->gridmask_ratio, 0, 0};
      gm.offset_x = static_cast<int>(rng.below(static_cast<uint64_t>(gm.period)));
      gm.offset_y = static_cast<int>(rng.below(static_cast<uint64_t>(gm.period)));
      s = gridmask(s, gm);
    }
  }
  return s;
}

}  // namespace

SampleTensor make_sample(const FrameInput& input, const PreprocessConfig& config, const AugmentationConfig* augment,
                         uint64_t frame_key) {
  return build_sample(input, config, augment, frame_key, true);
}

SampleTensor make_preview_sample(const FrameInput& input, const PreprocessConfig& config,
                                 const AugmentationConfig* augment, uint64_t frame_key) {
  return build_sample(input, config, augment, frame_key, false);
}

}  // namespace mvf::pipeline
