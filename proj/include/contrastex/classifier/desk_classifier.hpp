#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "contrastex/classifier/classifier.hpp"

namespace contrastex {

struct LabeledImage {
  Image image;
  bool positive = false;
};

enum class DeskModel { Logistic, Mlp };

struct DeskTrainingOptions {
  DeskModel model = DeskModel::Mlp;
  int pool = 16;           // features are pool x pool block averages
  int hidden_units = 16;   // Mlp only
  int epochs = 80;
  int batch_size = 64;
  double learning_rate = 3e-3;
  double l2 = 1e-4;
};

struct TrainingReport {
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  int epochs = 0;
};

// Average of each cell of a pool x pool grid; cell (r, c) spans rows
// floor(r*H/pool)..floor((r+1)*H/pool).
std::vector<double> pooled_features(const Image& image, int pool);

// Small regularised model over pooled pixel features: logistic regression or
// a one-hidden-layer tanh network with a sigmoid output. Inference is pure and
// thread-safe.
class DeskClassifier final : public Classifier {
 public:
  double probability(const Image& image) const override;
  ClassifierKind kind() const override { return ClassifierKind::Desk; }
  std::string description() const override;
  std::optional<InputSize> input_size() const override { return InputSize{width_, height_}; }

  nlohmann::json to_json() const;
  static DeskClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static DeskClassifier load(const std::filesystem::path& path);

  const TrainingReport& report() const { return report_; }

  friend DeskClassifier train_desk_classifier(const std::vector<LabeledImage>&, const std::vector<LabeledImage>&,
                                              std::uint64_t, const DeskTrainingOptions&);
  friend bool operator==(const DeskClassifier& a, const DeskClassifier& b);

 private:
  double forward(const Eigen::VectorXd& standardized) const;

  DeskModel model_ = DeskModel::Mlp;
  int width_ = 0;
  int height_ = 0;
  int pool_ = 16;
  Eigen::VectorXd feature_mean_;
  Eigen::VectorXd feature_scale_;
  Eigen::MatrixXd hidden_weights_;  // hidden x features (Mlp)
  Eigen::VectorXd hidden_bias_;
  Eigen::VectorXd output_weights_;  // hidden (Mlp) or features (Logistic)
  double output_bias_ = 0.0;
  TrainingReport report_;
};

// Throws SingleClassTraining unless both classes occur in `train`.
DeskClassifier train_desk_classifier(const std::vector<LabeledImage>& train, const std::vector<LabeledImage>& valid,
                                     std::uint64_t seed, const DeskTrainingOptions& options = {});

double accuracy(const Classifier& classifier, const std::vector<LabeledImage>& data,
                double boundary = kDefaultDecisionBoundary);

}  // namespace contrastex
