#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvf/image.hpp"
#include "mvf/ingest/sidecars.hpp"
#include "mvf/motionfield/motionfield.hpp"
#include "mvf/rng.hpp"
#include "mvf/tensor.hpp"

namespace mvf::pipeline {

using ingest::FaceBox;

enum class ChannelKind { kRgb, kMvX, kMvY, kIm };

// Classifier input. For every MV channel `mask_of` names its IM channel, or -1
// when the sample carries no IM channels (the 4-channel MV input).
struct SampleTensor {
  Tensor values;
  std::vector<ChannelKind> kinds;
  std::vector<int> mask_of;
  std::vector<uint8_t> degenerate;  // per channel: standardization had no spread

  int channels() const { return values.channels; }
  // IM = 0 implies zero motion in the paired MV channels.
  bool consistent() const;
  bool operator==(const SampleTensor&) const = default;
};

enum class Modality { kRgb, kMv, kMvIm, kRgbMvIm };

int channel_count(Modality modality);
std::string_view modality_name(Modality modality);
Modality parse_modality(std::string_view name);

FaceBox square_pad(const FaceBox& box, int frame_w, int frame_h);

enum class Interp { kBilinear, kNearest };

// Resamples the region [x0, x0+w) x [y0, y0+h) of a plane (in source pixel
// units) onto out_w x out_h samples with half-pixel centres. Reads outside the
// plane clamp to the edge.
void resample_plane(const float* src, int src_w, int src_h, double x0, double y0, double w, double h,
                    float* dst, int out_w, int out_h, Interp interp);

// RGB crop resized bilinearly; values stay in [0, 255].
SampleTensor crop_resize(const RgbImage& frame, const FaceBox& box, int input_res);

// Motion crop: MV planes bilinear, IM planes nearest, then MV is cleared where
// the resized IM is 0. The box is in frame pixels; MV values keep codec units.
// Channel order: past_x, past_y, future_x, future_y, im_past, im_future.
SampleTensor crop_resize(const motionfield::MotionField& field, const FaceBox& box, int input_res);

SampleTensor standardize_mv(const SampleTensor& sample);
SampleTensor standardize_rgb(const SampleTensor& sample);

SampleTensor flip_h(const SampleTensor& sample);
SampleTensor flip_v(const SampleTensor& sample);

// Channels concatenated in argument order; mask indices are re-based.
SampleTensor concat(const SampleTensor& a, const SampleTensor& b);
// Drops IM channels (MV+IM -> MV).
SampleTensor drop_masks(const SampleTensor& sample);

struct GridMaskParams {
  int period = 32;    // grid period d in pixels
  double ratio = 0.5;  // patch side = round(d * ratio)
  int offset_x = 0;
  int offset_y = 0;
};

// Zeroes every pixel with ((x - offset_x) mod d) < patch and
// ((y - offset_y) mod d) < patch, across all channels.
SampleTensor gridmask(const SampleTensor& sample, const GridMaskParams& params);

struct AugmentationConfig {
  uint64_t seed = 0;
  double p_flip_h = 0.1;
  double p_flip_v = 0.1;
  double p_gridmask = 0.1;
  int gridmask_period = 32;
  double gridmask_ratio = 0.5;
  double p_noise = 0.1;
  double noise_sigma = 8.0;  // 0-255 units
  double p_blur = 0.1;
  double blur_sigma = 1.0;  // kernel radius ceil(3 sigma)
  double p_brightness_contrast = 0.1;
  double brightness_min = -20.0, brightness_max = 20.0;
  double contrast_min = 0.8, contrast_max = 1.2;
  double p_grayscale = 0.1;
  double p_channel_shift = 0.1;
  double channel_shift = 20.0;
  double p_hsv = 0.1;
  double hue_shift = 10.0;  // degrees
  double saturation_shift = 0.1;
  double value_shift = 0.1;
  double p_fancy_pca = 0.1;
  double pca_scale = 0.1;

  // All probabilities zero.
  static AugmentationConfig none();
  // Throws FormatError on out-of-range values.
  void validate() const;
  bool operator==(const AugmentationConfig&) const = default;
};

// JSON object whose keys are the field names above; missing keys keep their
// defaults, unknown keys are FormatError.
AugmentationConfig parse_augmentation_config(std::string_view json_text);
AugmentationConfig read_augmentation_config(const std::filesystem::path& path);
std::string augmentation_config_json(const AugmentationConfig& config);

// Normalized separable gaussian kernel of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// RGB-only augmentations in [0, 255] units, each applied with its probability.
// Non-RGB channels are untouched.
SampleTensor rgb_augment(const SampleTensor& sample, const AugmentationConfig& config, Rng& rng);

// Individual operations, exposed for tests and previews.
void add_gaussian_noise(SampleTensor& s, double sigma, Rng& rng);
void gaussian_blur(SampleTensor& s, double sigma);
void brightness_contrast(SampleTensor& s, double brightness, double contrast);
void to_grayscale(SampleTensor& s);
void channel_shift(SampleTensor& s, const double shift[3]);
void hsv_shift(SampleTensor& s, double hue_deg, double sat, double val);
void fancy_pca(SampleTensor& s, const double alpha[3]);

// k indices of 0..n-1 sampled uniformly without replacement (all n when
// n <= k), ascending.
std::vector<int> sample_frames(int n, int k, uint64_t seed);

struct PreprocessConfig {
  int input_res = 224;
  Modality modality = Modality::kMvIm;
  bool past_only = false;

  bool operator==(const PreprocessConfig&) const = default;
};

// One frame's classifier input: square_pad, crop_resize, rgb_augment (when
// `augment`), standardization, flips, GridMask. Randomness comes from
// derive_seed(augment.seed, frame_key).
struct FrameInput {
  const RgbImage* frame = nullptr;                 // required for RGB modalities
  const motionfield::MotionField* field = nullptr;  // required for MV modalities
  int frame_w = 0;
  int frame_h = 0;
  FaceBox box;
};

SampleTensor make_sample(const FrameInput& input, const PreprocessConfig& config, const AugmentationConfig* augment,
                         uint64_t frame_key);

// make_sample without standardization: RGB stays in [0, 255] and motion in
// pixels. Augmentation draws are identical for the same key.
SampleTensor make_preview_sample(const FrameInput& input, const PreprocessConfig& config,
                                 const AugmentationConfig* augment, uint64_t frame_key);

}  // namespace mvf::pipeline
