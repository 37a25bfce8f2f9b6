#include <cmath>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mvf/error.hpp"
#include "mvf/ingest/fileio.hpp"
#include "mvf/pipeline/pipeline.hpp"

namespace mvf::pipeline {

namespace {

using nlohmann::json;

std::vector<std::pair<const char*, double AugmentationConfig::*>> real_fields() {
  return {
      {"p_flip_h", &AugmentationConfig::p_flip_h},
      {"p_flip_v", &AugmentationConfig::p_flip_v},
      {"p_gridmask", &AugmentationConfig::p_gridmask},
      {"gridmask_ratio", &AugmentationConfig::gridmask_ratio},
      {"p_noise", &AugmentationConfig::p_noise},
      {"noise_sigma", &AugmentationConfig::noise_sigma},
      {"p_blur", &AugmentationConfig::p_blur},
      {"blur_sigma", &AugmentationConfig::blur_sigma},
      {"p_brightness_contrast", &AugmentationConfig::p_brightness_contrast},
      {"brightness_min", &AugmentationConfig::brightness_min},
      {"brightness_max", &AugmentationConfig::brightness_max},
      {"contrast_min", &AugmentationConfig::contrast_min},
      {"contrast_max", &AugmentationConfig::contrast_max},
      {"p_grayscale", &AugmentationConfig::p_grayscale},
      {"p_channel_shift", &AugmentationConfig::p_channel_shift},
      {"channel_shift", &AugmentationConfig::channel_shift},
      {"p_hsv", &AugmentationConfig::p_hsv},
      {"hue_shift", &AugmentationConfig::hue_shift},
      {"saturation_shift", &AugmentationConfig::saturation_shift},
      {"value_shift", &AugmentationConfig::value_shift},
      {"p_fancy_pca", &AugmentationConfig::p_fancy_pca},
      {"pca_scale", &AugmentationConfig::pca_scale},
  };
}

}  // namespace

AugmentationConfig AugmentationConfig::none() {
  AugmentationConfig c;
  for (const auto& [name, member] : real_fields()) {
    if (std::string_view(name).starts_with("p_")) c.*member = 0.0;
  }
  return c;
}

void AugmentationConfig::validate() const {
  for (const auto& [name, member] : real_fields()) {
    const double v = this->*member;
    if (!std::isfinite(v)) throw FormatError(std::string(name) + " must be finite");
    if (std::string_view(name).starts_with("p_") && (v < 0.0 || v > 1.0)) {
      throw FormatError(std::string(name) + " must lie in [0, 1]");
    }
  }
  if (gridmask_period < 1) throw FormatError("gridmask_period must be >= 1");
  if (gridmask_ratio < 0.0 || gridmask_ratio > 1.0) throw FormatError("gridmask_ratio must lie in [0, 1]");
  if (noise_sigma < 0 || blur_sigma < 0 || channel_shift < 0 || hue_shift < 0 || saturation_shift < 0 ||
      value_shift < 0 || pca_scale < 0) {
    throw FormatError("augmentation magnitudes must be non-negative");
  }
  if (brightness_min > brightness_max || contrast_min > contrast_max || contrast_min < 0) {
    throw FormatError("brightness/contrast ranges must be ordered and contrast non-negative");
  }
}

AugmentationConfig parse_augmentation_config(std::string_view text) {
  json obj = json::parse(text.begin(), text.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw FormatError("augmentation config must be a JSON object");
  AugmentationConfig c;
  const auto fields = real_fields();
  for (const auto& [key, value] : obj.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw FormatError("seed must be a non-negative integer");
      c.seed = value.get<uint64_t>();
      continue;
    }
    if (key == "gridmask_period") {
      if (!value.is_number_integer()) throw FormatError("gridmask_period must be an integer");
      const int64_t v = value.get<int64_t>();
      if (v < 1 || v > 1 << 16) throw FormatError("gridmask_period out of range");
      c.gridmask_period = static_cast<int>(v);
      continue;
    }
    bool known = false;
    for (const auto& [name, member] : fields) {
      if (key != name) continue;
      if (!value.is_number()) throw FormatError(key + " must be a number");
      c.*member = value.get<double>();
      known = true;
    }
    if (!known) throw FormatError("unknown augmentation key \"" + key + "\"");
  }
  c.validate();
  return c;
}

AugmentationConfig read_augmentation_config(const std::filesystem::path& path) {
  return parse_augmentation_config(ingest::read_file_text(path));
}

std::string augmentation_config_json(const AugmentationConfig& config) {
  json obj = json::object();
  obj["seed"] = config.seed;
  obj["gridmask_period"] = config.gridmask_period;
  for (const auto& [name, member] : real_fields()) obj[name] = config.*member;
  return obj.dump(2) + "\n";
}

}  // namespace mvf::pipeline
