#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contrastex/regression/regression.hpp"
#include "contrastex/segmentation/segmentation.hpp"

namespace contrastex {

// Where replaced segments take their pixels from.
enum class Infill { Contrast, Black };

struct ExplainParams {
  SegmentationParams segmentation;
  int max_predictors = 6;
  double counterfactual_weight = 200.0;
  bool apply_counterfactual_weights = true;
  double decision_boundary = kDefaultDecisionBoundary;
  double sufficiency_threshold = kDefaultSufficiencyThreshold;
  std::size_t max_segments_in_counterfactual = 4;
  std::optional<std::size_t> num_samples = 1000;
  Infill infill = Infill::Contrast;
  FitOptions fit;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

// <G, C, r, O, e> plus everything needed to report on it.
struct Explanation {
  double y_original = 0.0;
  SegmentationResult segmentation;
  std::vector<PerturbationRecord> records;  // enumeration order, without the anchor row
  std::size_t enumerated_total = 0;         // before any subsampling
  std::vector<Counterfactual> counterfactuals;
  std::vector<int> selected;                // in order of stepwise selection
  RegressionModel regression;
  std::map<int, double> scores;
  Overdetermination overdetermination;
  CausalRoles roles;
  std::vector<double> fidelity;  // one per counterfactual
  double max_fidelity_error = 0.0;
  double mean_fidelity_error = 0.0;
  std::vector<std::string> warnings;

  const SegmentMap& segments() const { return segmentation.segments; }
};

// Segmentation, perturbation, counterfactual search, weighted stepwise
// regression, scores, overdetermination and fidelity, in that order. Only
// images the classifier assigns to the explained class are accepted
// (NotPositiveClass otherwise). An empty counterfactual set is a warning.
Explanation explain(const Image& x, const Image& x_prime, const Classifier& classifier, const ExplainParams& params);

}  // namespace contrastex
