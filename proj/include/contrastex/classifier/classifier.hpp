#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

inline constexpr double kDefaultDecisionBoundary = 0.5;

// Probability of the explained class l ("diseased"); `positive` is the label
// derived from the decision boundary (probability >= boundary).
struct Prediction {
  double probability = 0.0;
  bool positive = false;
};

enum class ClassifierKind { Desk, Planted, Subprocess };

std::string to_string(ClassifierKind kind);

struct InputSize {
  int width = 0;
  int height = 0;
};

// The black box. Implementations must be deterministic: the same image always
// yields the same probability.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual double probability(const Image& image) const = 0;
  virtual ClassifierKind kind() const = 0;
  virtual std::string description() const = 0;
  // When false, callers must not invoke probability() concurrently.
  virtual bool concurrency_safe() const { return true; }
  virtual std::optional<InputSize> input_size() const { return std::nullopt; }
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

// Checks the declared input size and the [0,1] range of the answer.
Prediction classify(const Classifier& classifier, const Image& image, double boundary = kDefaultDecisionBoundary);

// Wraps an arbitrary function; used for analytic fixtures.
ClassifierHandle planted_function(std::function<double(const Image&)> fn, std::string description,
                                  std::optional<InputSize> size = std::nullopt);

// p = sigma(intercept + sum_i w_i * presence_i(x)), presence_i = 1 when the
// mean |x - reference| over region i exceeds `presence_threshold`.
class PlantedRegionClassifier final : public Classifier {
 public:
  PlantedRegionClassifier(std::vector<BinaryMask> regions, std::vector<double> weights, double intercept, Image reference,
                          double presence_threshold = 0.05);

  double probability(const Image& image) const override;
  ClassifierKind kind() const override { return ClassifierKind::Planted; }
  std::string description() const override;
  std::optional<InputSize> input_size() const override {
    return InputSize{reference_.width(), reference_.height()};
  }

  // Presence vector for an image (one 0/1 entry per region).
  std::vector<int> presence(const Image& image) const;
  double logit(const std::vector<int>& presence) const;

  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }

 private:
  std::vector<std::vector<std::size_t>> region_pixels_;
  std::vector<double> weights_;
  double intercept_;
  Image reference_;
  double presence_threshold_;
};

ClassifierHandle planted_region_classifier(std::vector<BinaryMask> regions, std::vector<double> weights, double intercept,
                                           Image reference);

double sigmoid(double z) noexcept;
double logit(double p) noexcept;

// Probabilities are clamped to [1e-6, 1 - 1e-6] before any logit is taken.
inline constexpr double kProbabilityFloor = 1e-6;
double clamp_probability(double p) noexcept;

}  // namespace contrastex
