#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "contrastex/classifier/classifier.hpp"
#include "contrastex/imaging/image.hpp"
#include "contrastex/segmentation/segment_map.hpp"

namespace contrastex {

// Bit i describes segment i+1: 1 keeps the content of x, 0 infills it from
// the contrast image. At most 64 segments.
class PerturbationVector {
 public:
  PerturbationVector() = default;
  explicit PerturbationVector(std::size_t n) : bits_(n, 1) {}
  explicit PerturbationVector(std::vector<std::uint8_t> bits);

  static PerturbationVector replacing(std::size_t n, std::span<const int> replaced_ids);
  static PerturbationVector from_replaced_mask(std::size_t n, std::uint64_t mask);

  std::size_t size() const noexcept { return bits_.size(); }
  bool keeps(std::size_t i) const { return bits_.at(i) != 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  std::vector<int> replaced_ids() const;  // ascending, 1-based
  std::size_t replaced_count() const noexcept;
  std::uint64_t replaced_mask() const noexcept;  // bit i set when segment i+1 is replaced

  friend bool operator==(const PerturbationVector&, const PerturbationVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Segment pixels come from x where b keeps them, from `infill` otherwise;
// pixels outside every segment always come from x.
class Composer {
 public:
  Composer(const Image& x, const Image& infill, const SegmentMap& segments);
  Image compose(const PerturbationVector& b) const;
  std::size_t segment_count() const { return pixels_.size(); }

 private:
  const Image& x_;
  const Image& infill_;
  std::vector<std::vector<std::size_t>> pixels_;
};

Image compose_image(const Image& x, const Image& infill, const SegmentMap& segments, const PerturbationVector& b);

// All vectors with 1..max_size replaced segments, ordered by size and then
// lexicographically by replaced ids. When `cap` is set and the count exceeds
// it, every vector with <= 2 replacements is kept and the remaining budget is
// drawn uniformly without replacement from the larger sizes (fixed seed); the
// survivors keep enumeration order.
std::vector<PerturbationVector> enumerate_perturbations(std::size_t n, std::size_t max_size = 4,
                                                        std::optional<std::size_t> cap = std::nullopt,
                                                        std::uint64_t seed = 0);

struct PerturbationRecord {
  PerturbationVector vector;
  double probability = 0.0;
  bool is_counterfactual = false;
};

// One record per vector, in the same order. Calls fan out over `workers`
// threads only when the classifier is concurrency safe.
std::vector<PerturbationRecord> evaluate_dataset(const Classifier& classifier, const Image& x, const Image& infill,
                                                 const SegmentMap& segments, std::span<const PerturbationVector> vectors,
                                                 std::size_t workers = 1);

struct Counterfactual {
  std::vector<int> replaced;  // ascending segment ids
  PerturbationVector vector;
  double probability = 0.0;

  std::size_t size() const { return replaced.size(); }
};

// Probability for a vector missing from the records (evaluated on demand).
using ProbabilityOracle = std::function<double(const PerturbationVector&)>;

// Image-counterfactuals among the records: the class flips relative to the
// original prediction, restoring any single replaced segment gives back the
// original class, and no smaller reported counterfactual is a subset.
// Sorted by size, then lexicographically. A minimality check that needs a
// record which is absent consults `oracle`, or throws IncompleteEnumeration
// when none is given.
std::vector<Counterfactual> find_counterfactuals(std::span<const PerturbationRecord> records, double y_original,
                                                 double boundary = kDefaultDecisionBoundary,
                                                 const ProbabilityOracle& oracle = {});

// Sets is_counterfactual on the records matching `counterfactuals`.
void mark_counterfactuals(std::span<PerturbationRecord> records, std::span<const Counterfactual> counterfactuals);

}  // namespace contrastex
