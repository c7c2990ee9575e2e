#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "contrastex/perturbation/perturbation.hpp"

namespace contrastex {

inline constexpr double kDefaultSufficiencyThreshold = 0.99;

// One row of the {0,1} table: bit i = 1 keeps segment i+1 from x.
struct RegressionRow {
  PerturbationVector vector;
  double y = 0.0;
  double weight = 1.0;
};

struct FitOptions {
  bool centering = true;
  int max_iterations = 100;
  double tolerance = 1e-8;  // on the largest coefficient change
  double ridge = 1e-6;
};

// p(b) = sigma(intercept + sum_i w_i b_i) over the selected segments.
struct RegressionModel {
  double intercept = 0.0;
  std::map<int, double> coefficients;  // segment id -> w_i
  std::vector<double> weights;          // per-row fitting weights
  double log_likelihood = 0.0;
  double aic = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool ridge_used = false;

  std::size_t parameter_count() const { return coefficients.size() + 1; }
  double linear_predictor(const PerturbationVector& b) const;
  double predict(const PerturbationVector& b) const;
  // Segments listed in `present` take 1, all others 0.
  double linear_predictor(std::span<const int> present) const;
};

// Weighted fractional-response logistic regression by IRLS. y is clamped to
// [1e-6, 1 - 1e-6]. Predictors are centred by their column mean during the
// fit when requested; the reported intercept is for uncentred 0/1 inputs.
// Falls back to a ridge term when the Hessian is not positive definite.
RegressionModel fit_weighted_logistic(std::span<const RegressionRow> rows, std::span<const int> selected,
                                      const FitOptions& options = {});

// Forward selection by AIC = 2k - 2 loglik over candidate segments 1..n.
// Each step adds the candidate with the lowest AIC (lowest id on ties) and
// stops when nothing improves on the current model or max_predictors is hit.
std::vector<int> stepwise_select(std::span<const RegressionRow> rows, int max_predictors, const FitOptions& options = {});

// G: selected segment -> coefficient.
std::map<int, double> segment_scores(const RegressionModel& model);

double fidelity_error(double predicted, double observed);

// |reg(c_j) - y_{c_j}| per counterfactual, in order.
std::vector<double> fidelity_errors(const RegressionModel& model, std::span<const Counterfactual> counterfactuals);

struct Overdetermination {
  std::vector<int> sufficient;  // w0 + w_i > logit(threshold)
  bool overdetermined = false;  // two or more sufficient causes
};

Overdetermination find_overdetermination(const RegressionModel& model,
                                         double sufficiency_threshold = kDefaultSufficiencyThreshold);

struct CausalRoles {
  std::vector<int> sufficient;
  std::vector<int> necessary;
  std::vector<int> necessary_insufficient;
};

// Necessary: no assignment of the other selected segments clears
// logit(threshold) without i. Insufficient: w0 + w_i alone does not clear it.
// Necessity is only reported when some assignment clears the threshold.
CausalRoles classify_causal_roles(const RegressionModel& model,
                                  double sufficiency_threshold = kDefaultSufficiencyThreshold);

}  // namespace contrastex
