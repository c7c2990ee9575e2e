#include "contrastex/regression/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace contrastex {

double RegressionModel::linear_predictor(const PerturbationVector& b) const {
  double z = intercept;
  for (const auto& [id, w] : coefficients) {
    if (static_cast<std::size_t>(id) > b.size()) fail(ErrorKind::UnknownSegmentId, "segment " + std::to_string(id));
    if (b.keeps(static_cast<std::size_t>(id - 1))) z += w;
  }
  return z;
}

double RegressionModel::linear_predictor(std::span<const int> present) const {
  double z = intercept;
  for (int id : present) {
    if (const auto it = coefficients.find(id); it != coefficients.end()) z += it->second;
  }
  return z;
}

double RegressionModel::predict(const PerturbationVector& b) const { return sigmoid(linear_predictor(b)); }

namespace {

double weighted_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    // log sigma(z) = -log(1 + e^-z), written to stay finite for large |z|.
    const double z = eta[r];
    const double log_p = z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
    const double log_q = log_p - z;
    ll += w[r] * (y[r] * log_p + (1.0 - y[r]) * log_q);
  }
  return ll;
}

}  // namespace

RegressionModel fit_weighted_logistic(std::span<const RegressionRow> rows, std::span<const int> selected,
                                      const FitOptions& options) {
  if (rows.size() < 2) fail(ErrorKind::InsufficientData, "logistic fit needs at least two rows");
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(selected.size());
  const std::size_t n_segments = rows.front().vector.size();
  for (int id : selected) {
    if (id < 1 || static_cast<std::size_t>(id) > n_segments) fail(ErrorKind::UnknownSegmentId, "segment " + std::to_string(id));
  }

  Eigen::MatrixXd X(n_rows, k + 1);
  Eigen::VectorXd y(n_rows);
  Eigen::VectorXd w(n_rows);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (row.vector.size() != n_segments) fail(ErrorKind::LengthMismatch, "rows disagree on the segment count");
    if (!(row.weight >= 0.0)) fail(ErrorKind::InvalidArgument, "row weights must be non-negative");
    X(r, 0) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      X(r, j + 1) = row.vector.keeps(static_cast<std::size_t>(selected[static_cast<std::size_t>(j)] - 1)) ? 1.0 : 0.0;
    }
    y[r] = clamp_probability(row.y);
    w[r] = row.weight;
  }

  Eigen::VectorXd means = Eigen::VectorXd::Zero(k + 1);
  if (options.centering && k > 0) {
    for (Eigen::Index j = 1; j <= k; ++j) {
      means[j] = X.col(j).mean();
      X.col(j).array() -= means[j];
    }
  }

  RegressionModel model;
  model.weights.assign(w.data(), w.data() + w.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
  const double y_bar = (w.array() * y.array()).sum() / std::max(w.sum(), std::numeric_limits<double>::min());
  beta[0] = logit(clamp_probability(y_bar));
  Eigen::VectorXd eta = X * beta;
  double ll = weighted_log_likelihood(eta, y, w);

  for (int it = 1; it <= options.max_iterations; ++it) {
    model.n_iterations = it;
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-eta.array()).exp());
    const Eigen::VectorXd grad = X.transpose() * (w.array() * (y.array() - p)).matrix();
    const Eigen::VectorXd curvature = (w.array() * p * (1.0 - p)).matrix();
    Eigen::MatrixXd H = X.transpose() * curvature.asDiagonal() * X;

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    bool ok = llt.info() == Eigen::Success;
    Eigen::VectorXd step;
    if (ok) {
      step = llt.solve(grad);
      ok = step.allFinite();
    }
    if (!ok) {
      model.ridge_used = true;
      H.diagonal().array() += options.ridge * std::max(1.0, H.diagonal().maxCoeff());
      step = H.ldlt().solve(grad);
      if (!step.allFinite()) break;
    }

    // Newton step with halving so the likelihood never decreases.
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    Eigen::VectorXd candidate_eta = X * candidate;
    double candidate_ll = weighted_log_likelihood(candidate_eta, y, w);
    for (int halving = 0; halving < 30 && !(candidate_ll >= ll - 1e-12 * std::abs(ll)); ++halving) {
      scale *= 0.5;
      candidate = beta + scale * step;
      candidate_eta = X * candidate;
      candidate_ll = weighted_log_likelihood(candidate_eta, y, w);
    }
    const double change = (candidate - beta).cwiseAbs().maxCoeff();
    beta = candidate;
    eta = candidate_eta;
    ll = candidate_ll;
    if (change < options.tolerance) {
      model.converged = true;
      break;
    }
  }

  model.intercept = beta[0];
  for (Eigen::Index j = 1; j <= k; ++j) {
    model.coefficients[selected[static_cast<std::size_t>(j - 1)]] = beta[j];
    model.intercept -= beta[j] * means[j];
  }
  model.log_likelihood = ll;
  model.aic = 2.0 * static_cast<double>(k + 1) - 2.0 * ll;
  return model;
}

std::vector<int> stepwise_select(std::span<const RegressionRow> rows, int max_predictors, const FitOptions& options) {
  if (rows.empty()) fail(ErrorKind::InsufficientData, "stepwise selection needs rows");
  const int n = static_cast<int>(rows.front().vector.size());
  std::vector<int> selected;
  double current = fit_weighted_logistic(rows, selected, options).aic;
  while (static_cast<int>(selected.size()) < max_predictors) {
    int best_id = 0;
    double best_aic = current;
    for (int id = 1; id <= n; ++id) {
      if (std::find(selected.begin(), selected.end(), id) != selected.end()) continue;
      auto trial = selected;
      trial.push_back(id);
      const double aic = fit_weighted_logistic(rows, trial, options).aic;
      if (aic < best_aic) {
        best_aic = aic;
        best_id = id;
      }
    }
    if (best_id == 0) break;
    selected.push_back(best_id);
    current = best_aic;
  }
  return selected;
}

std::map<int, double> segment_scores(const RegressionModel& model) { return model.coefficients; }

double fidelity_error(double predicted, double observed) { return std::abs(predicted - observed); }

std::vector<double> fidelity_errors(const RegressionModel& model, std::span<const Counterfactual> counterfactuals) {
  std::vector<double> errors;
  errors.reserve(counterfactuals.size());
  for (const auto& c : counterfactuals) errors.push_back(fidelity_error(model.predict(c.vector), c.probability));
  return errors;
}

Overdetermination find_overdetermination(const RegressionModel& model, double sufficiency_threshold) {
  const double margin = logit(sufficiency_threshold);
  Overdetermination result;
  for (const auto& [id, w] : model.coefficients) {
    if (model.intercept + w > margin) result.sufficient.push_back(id);
  }
  result.overdetermined = result.sufficient.size() >= 2;
  return result;
}

CausalRoles classify_causal_roles(const RegressionModel& model, double sufficiency_threshold) {
  const double margin = logit(sufficiency_threshold);
  CausalRoles roles;
  double best = model.intercept;
  for (const auto& [id, w] : model.coefficients) best += std::max(w, 0.0);
  const bool reachable = best > margin;
  for (const auto& [id, w] : model.coefficients) {
    const bool insufficient = model.intercept + w <= margin;
    if (!insufficient) roles.sufficient.push_back(id);
    double without = model.intercept;
    for (const auto& [other, v] : model.coefficients) {
      if (other != id) without += std::max(v, 0.0);
    }
    const bool necessary = reachable && without <= margin;
    if (necessary) roles.necessary.push_back(id);
    if (necessary && insufficient) roles.necessary_insufficient.push_back(id);
  }
  return roles;
}

}  // namespace contrastex
