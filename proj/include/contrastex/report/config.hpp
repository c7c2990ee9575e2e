#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrastex/evaluation/metrics.hpp"
#include "contrastex/regression/explain.hpp"

namespace contrastex {

// Run parameters under their conventional names (max_predictors,
// counterfactual_weight, image_infill, ...). Keys that describe behaviour this
// engine does not have (interaction terms, feature forcing, linear
// regression) are accepted only with their default value so that existing
// parameter lists paste in unchanged.
struct RunConfig {
  // Regression and counterfactual search.
  int max_predictors = 6;
  std::size_t num_samples = 1000;
  double counterfactual_weight = 200.0;
  bool apply_counterfactual_weights = true;
  double binary_decision_boundary = 0.5;
  double sufficiency_threshold = 0.99;
  std::size_t max_segments_in_counterfactual = 4;
  bool centering = true;

  // Segmentation. Sizes left unset scale 250 / 25 pixels (quoted for
  // 256x256 images) by image area.
  int min_segs_created_for_Augmented_GAN = 4;
  std::optional<std::size_t> min_seg_size;
  std::optional<std::size_t> min_seg_increment;
  std::string threshold_method = "multi_otsu";  // or "manual"
  double threshold_high = 0.6;
  double threshold_low = 0.2;
  std::string image_infill = "GAN";                    // or "black"
  std::string image_segment_type = "Augmented_GAN";    // "Thresholding", "Felzenszwalb"
  double felzenszwalb_scale = 1.0;
  double felzenszwalb_sigma = 0.8;
  int erosion_radius = 1;
  int max_segments = 20;

  // Evaluation.
  std::string pointing_game_mode = "per_square";  // or "per_target"
  std::string saliency_polarity = "positive";     // or "absolute"
  double iou_threshold = 70.0;
  std::vector<int> sweep_percents = {60, 70, 80, 90};

  // Bookkeeping keys, echoed but not interpreted.
  std::string case_study;
  std::vector<std::string> image_classes;

  std::uint64_t seed = 0;
  std::optional<std::size_t> workers;  // CONTRASTEX_WORKERS when unset
  double classifier_timeout_s = 30.0;

  void validate() const;

  ExplainParams explain_params(int width, int height) const;
  PointingGameOptions pointing_options() const;
  Polarity polarity() const;
  std::size_t resolved_workers() const;
};

// 250 * area / 256^2, at least 1.
std::size_t scaled_segment_size(std::size_t reference, int width, int height);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

// Applies one assignment `key=value`; the value is a Python-style literal
// (True, False, None, 'text', 1e-3, [1, 2]) or bare text.
void apply_setting(RunConfig& config, const std::string& assignment);

// Flat `key = value` lines (# comments) or a JSON object, by content.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Python literal -> JSON value.
nlohmann::json parse_literal(const std::string& text);

}  // namespace contrastex
