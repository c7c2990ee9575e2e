#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrastex/regression/explain.hpp"

namespace contrastex {

// Segment scores painted onto the segment map; unselected segments are 0.
SaliencyMap explanation_saliency(const Explanation& ex);

nlohmann::json explanation_to_json(const Explanation& ex, double sufficiency_threshold);

// Plain-text report: counterfactuals with fidelity, the regression equation,
// sufficient causes and necessary-but-insufficient causes.
std::string text_report(const Explanation& ex, double sufficiency_threshold);

// Seg01..SegNN, probability, is_counterfactual. The first row is the
// unperturbed image.
std::string perturbation_csv(const Explanation& ex);

struct ArtifactPaths {
  std::filesystem::path explanation_json;
  std::filesystem::path report_txt;
  std::filesystem::path saliency_png;
  std::filesystem::path saliency_json;
  std::filesystem::path segments_png;
  std::filesystem::path segments_json;
  std::filesystem::path perturbations_csv;

  std::vector<std::filesystem::path> all() const;
};

ArtifactPaths write_explanation_artifacts(const std::filesystem::path& directory, const Explanation& ex, const Image& x,
                                          double sufficiency_threshold);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace contrastex
