#include "contrastex/classifier/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace contrastex {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Desk: return "desk";
    case ClassifierKind::Planted: return "planted";
    case ClassifierKind::Subprocess: return "subprocess";
  }
  return "unknown";
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

double clamp_probability(double p) noexcept { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

Prediction classify(const Classifier& classifier, const Image& image, double boundary) {
  if (const auto size = classifier.input_size()) {
    if (size->width != image.width() || size->height != image.height()) {
      fail(ErrorKind::DimensionMismatch, "classifier expects " + std::to_string(size->width) + "x" +
                                             std::to_string(size->height) + ", got " + std::to_string(image.width()) +
                                             "x" + std::to_string(image.height()));
    }
  }
  const double p = classifier.probability(image);
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "classifier returned a probability outside [0,1]");
  return {p, p >= boundary};
}

namespace {

class FunctionClassifier final : public Classifier {
 public:
  FunctionClassifier(std::function<double(const Image&)> fn, std::string description, std::optional<InputSize> size)
      : fn_(std::move(fn)), description_(std::move(description)), size_(size) {}

  double probability(const Image& image) const override { return fn_(image); }
  ClassifierKind kind() const override { return ClassifierKind::Planted; }
  std::string description() const override { return description_; }
  std::optional<InputSize> input_size() const override { return size_; }

 private:
  std::function<double(const Image&)> fn_;
  std::string description_;
  std::optional<InputSize> size_;
};

}  // namespace

ClassifierHandle planted_function(std::function<double(const Image&)> fn, std::string description,
                                  std::optional<InputSize> size) {
  return std::make_shared<FunctionClassifier>(std::move(fn), std::move(description), size);
}

PlantedRegionClassifier::PlantedRegionClassifier(std::vector<BinaryMask> regions, std::vector<double> weights,
                                                 double intercept, Image reference, double presence_threshold)
    : weights_(std::move(weights)),
      intercept_(intercept),
      reference_(std::move(reference)),
      presence_threshold_(presence_threshold) {
  if (regions.size() != weights_.size()) fail(ErrorKind::LengthMismatch, "one weight per region required");
  std::vector<std::uint8_t> claimed(reference_.size(), 0);
  for (const auto& region : regions) {
    require_same_shape(region, reference_, "planted region must match the reference image");
    std::vector<std::size_t> pixels;
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (region[i] == 0) continue;
      if (claimed[i] != 0) fail(ErrorKind::OverlappingRegions, "planted regions overlap");
      claimed[i] = 1;
      pixels.push_back(i);
    }
    if (pixels.empty()) fail(ErrorKind::InvalidArgument, "planted region is empty");
    region_pixels_.push_back(std::move(pixels));
  }
}

std::vector<int> PlantedRegionClassifier::presence(const Image& image) const {
  require_same_shape(image, reference_, "image does not match the planted reference");
  std::vector<int> out;
  out.reserve(region_pixels_.size());
  for (const auto& pixels : region_pixels_) {
    double total = 0.0;
    for (auto i : pixels) total += std::abs(image[i] - reference_[i]);
    out.push_back(total / static_cast<double>(pixels.size()) > presence_threshold_ ? 1 : 0);
  }
  return out;
}

double PlantedRegionClassifier::logit(const std::vector<int>& presence) const {
  double z = intercept_;
  for (std::size_t i = 0; i < presence.size(); ++i) z += weights_[i] * presence[i];
  return z;
}

double PlantedRegionClassifier::probability(const Image& image) const { return sigmoid(logit(presence(image))); }

std::string PlantedRegionClassifier::description() const {
  std::ostringstream out;
  out << "planted logistic over " << weights_.size() << " regions, intercept " << intercept_;
  return out.str();
}

ClassifierHandle planted_region_classifier(std::vector<BinaryMask> regions, std::vector<double> weights, double intercept,
                                           Image reference) {
  return std::make_shared<PlantedRegionClassifier>(std::move(regions), std::move(weights), intercept, std::move(reference));
}

}  // namespace contrastex
