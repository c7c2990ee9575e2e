#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "contrastex/classifier/desk_classifier.hpp"
#include "contrastex/report/artifacts.hpp"
#include "contrastex/report/config.hpp"

namespace contrastex {

// 0 success, 2 configuration, 3 input/output, 4 classifier, 5 anything else.
int exit_code(ErrorKind kind) noexcept;

// "subprocess:<shell command>", "desk:<model.json>" or a bare model path.
ClassifierHandle open_classifier(const std::string& spec, const RunConfig& config);

struct GenerateOptions {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  double disease_ratio = 0.5;
  int width = 128;
  int height = 128;
  std::filesystem::path output;
};

void cmd_generate(const GenerateOptions& options);

struct TrainOptions {
  std::optional<std::filesystem::path> dataset;  // otherwise a fresh synthetic set
  std::size_t generate_count = 2000;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
  DeskTrainingOptions training;
  std::filesystem::path output;  // model JSON; a *_report.json lands beside it
};

TrainingReport cmd_train(const TrainOptions& options);

struct ExplainPaths {
  std::filesystem::path x;
  std::filesystem::path x_prime;
  std::string classifier;
  std::filesystem::path output;
};

// Writes the explanation artifacts and resolved_config.json.
ArtifactPaths cmd_explain(const RunConfig& config, const ExplainPaths& paths);

struct EvaluateOptions {
  std::filesystem::path dataset;
  std::optional<std::string> classifier;              // explain each image
  std::optional<std::filesystem::path> saliency_dir;  // or read <id>_saliency.{json,png}
  std::filesystem::path output;
  bool save_saliency = true;  // write computed maps to output/saliency
};

struct ImageScore {
  std::string id;
  std::string method;  // "explained", "external" or "random"
  int hits = 0;
  int misses = 0;
  double pointing = 0.0;
  double iou = 0.0;
  std::map<int, double> sweep;
  bool has_counterfactual = false;
  double mean_fidelity_error = 0.0;
  std::size_t counterfactual_count = 0;
};

struct MethodSummary {
  std::string method;
  Aggregate pointing;
  Aggregate iou;
  std::map<int, Aggregate> sweep;
  int best_sweep_percent = 0;
};

struct EvaluationSummary {
  std::vector<ImageScore> images;
  std::vector<MethodSummary> methods;
  std::vector<std::string> skipped;  // ids that could not be explained, with the reason
  double counterfactual_rate = 0.0;  // images with a counterfactual of <= max size
  double mean_fidelity_error = 0.0;  // over all counterfactuals
};

// Pointing game and IoU for every diseased item, for the requested saliency
// source and a random baseline. Writes per_image.csv, aggregate.json and
// chart.svg. An empty dataset is a configuration error.
EvaluationSummary cmd_evaluate(const RunConfig& config, const EvaluateOptions& options);

// IoU across config.sweep_percents; writes sweep.json with the best percent.
EvaluationSummary cmd_sweep(const RunConfig& config, const EvaluateOptions& options);

}  // namespace contrastex
