#include "contrastex/regression/explain.hpp"

#include <algorithm>
#include <numeric>

namespace contrastex {

void ExplainParams::validate() const {
  segmentation.validate();
  if (max_predictors < 0) fail(ErrorKind::Config, "max_predictors must be >= 0");
  if (!(counterfactual_weight > 0.0)) fail(ErrorKind::Config, "counterfactual_weight must be positive");
  if (!(decision_boundary > 0.0 && decision_boundary < 1.0)) fail(ErrorKind::Config, "binary_decision_boundary must be in (0, 1)");
  if (!(sufficiency_threshold > 0.0 && sufficiency_threshold < 1.0)) {
    fail(ErrorKind::Config, "sufficiency_threshold must be in (0, 1)");
  }
  if (max_segments_in_counterfactual < 1) fail(ErrorKind::Config, "max_segments_in_counterfactual must be >= 1");
  if (num_samples && *num_samples < 1) fail(ErrorKind::Config, "num_samples must be >= 1");
  if (fit.max_iterations < 1) fail(ErrorKind::Config, "regression needs at least one iteration");
}

Explanation explain(const Image& x, const Image& x_prime, const Classifier& classifier, const ExplainParams& params) {
  params.validate();
  require_same_shape(x, x_prime, "image and contrast must have the same size");

  Explanation ex;
  ex.y_original = classify(classifier, x, params.decision_boundary).probability;
  if (ex.y_original < params.decision_boundary) {
    fail(ErrorKind::NotPositiveClass, "classifier probability " + std::to_string(ex.y_original) + " is below the decision boundary");
  }

  SegmentationParams seg = params.segmentation;
  seg.decision_boundary = params.decision_boundary;
  seg.workers = params.workers;
  ex.segmentation = gan_augmented_segmentation(x, x_prime, classifier, seg);
  const SegmentMap& segments = ex.segmentation.segments;
  const auto n = static_cast<std::size_t>(segments.count());

  const Image infill = params.infill == Infill::Black ? Image(x.width(), x.height(), 0.0) : x_prime;
  const auto vectors = enumerate_perturbations(n, params.max_segments_in_counterfactual, std::nullopt, params.seed);
  ex.enumerated_total = vectors.size();
  const auto sampled =
      params.num_samples && vectors.size() > *params.num_samples
          ? enumerate_perturbations(n, params.max_segments_in_counterfactual, params.num_samples, params.seed)
          : vectors;
  if (sampled.size() < vectors.size()) {
    ex.warnings.push_back("evaluated " + std::to_string(sampled.size()) + " of " + std::to_string(vectors.size()) +
                          " perturbations");
  }
  ex.records = evaluate_dataset(classifier, x, infill, segments, sampled, params.workers);

  const Composer composer(x, infill, segments);
  const ProbabilityOracle oracle = [&](const PerturbationVector& b) {
    return classify(classifier, composer.compose(b), params.decision_boundary).probability;
  };
  ex.counterfactuals = find_counterfactuals(ex.records, ex.y_original, params.decision_boundary, oracle);
  mark_counterfactuals(ex.records, ex.counterfactuals);
  if (ex.counterfactuals.empty()) ex.warnings.push_back("no counterfactual found");

  std::vector<RegressionRow> rows;
  rows.reserve(ex.records.size() + 1);
  rows.push_back({PerturbationVector(n), ex.y_original, 1.0});
  for (const auto& r : ex.records) {
    const double weight = params.apply_counterfactual_weights && r.is_counterfactual ? params.counterfactual_weight : 1.0;
    rows.push_back({r.vector, r.probability, weight});
  }
  ex.selected = stepwise_select(rows, params.max_predictors, params.fit);
  std::vector<int> ordered = ex.selected;
  std::sort(ordered.begin(), ordered.end());
  ex.regression = fit_weighted_logistic(rows, ordered, params.fit);
  if (!ex.regression.converged) ex.warnings.push_back("regression did not converge");
  if (ex.regression.ridge_used) ex.warnings.push_back("ridge fallback used in regression");

  ex.scores = segment_scores(ex.regression);
  ex.overdetermination = find_overdetermination(ex.regression, params.sufficiency_threshold);
  ex.roles = classify_causal_roles(ex.regression, params.sufficiency_threshold);
  ex.fidelity = fidelity_errors(ex.regression, ex.counterfactuals);
  if (!ex.fidelity.empty()) {
    ex.max_fidelity_error = *std::max_element(ex.fidelity.begin(), ex.fidelity.end());
    ex.mean_fidelity_error =
        std::accumulate(ex.fidelity.begin(), ex.fidelity.end(), 0.0) / static_cast<double>(ex.fidelity.size());
  }
  return ex;
}

}  // namespace contrastex
