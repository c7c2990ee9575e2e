#include "contrastex/perturbation/perturbation.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "contrastex/util/parallel.hpp"
#include "contrastex/util/random.hpp"

namespace contrastex {

namespace {

constexpr std::size_t kMaxSegments = 64;

void check_segment_count(std::size_t n) {
  if (n > kMaxSegments) fail(ErrorKind::InvalidArgument, "at most 64 segments are supported");
}

bool flips(double probability, double y_original, double boundary) {
  return (probability >= boundary) != (y_original >= boundary);
}

}  // namespace

PerturbationVector::PerturbationVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  check_segment_count(bits_.size());
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

PerturbationVector PerturbationVector::replacing(std::size_t n, std::span<const int> replaced_ids) {
  check_segment_count(n);
  PerturbationVector v(n);
  for (int id : replaced_ids) {
    if (id < 1 || static_cast<std::size_t>(id) > n) fail(ErrorKind::UnknownSegmentId, "segment " + std::to_string(id));
    v.bits_[static_cast<std::size_t>(id - 1)] = 0;
  }
  return v;
}

PerturbationVector PerturbationVector::from_replaced_mask(std::size_t n, std::uint64_t mask) {
  check_segment_count(n);
  PerturbationVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1U) v.bits_[i] = 0;
  }
  return v;
}

std::vector<int> PerturbationVector::replaced_ids() const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] == 0) ids.push_back(static_cast<int>(i) + 1);
  }
  return ids;
}

std::size_t PerturbationVector::replaced_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
}

std::uint64_t PerturbationVector::replaced_mask() const noexcept {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] == 0) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

Composer::Composer(const Image& x, const Image& infill, const SegmentMap& segments)
    : x_(x), infill_(infill), pixels_(segments.pixel_lists()) {
  require_same_shape(x, infill, "image and contrast must have the same size");
  require_same_shape(x, segments.labels(), "segment map must match the image");
}

Image Composer::compose(const PerturbationVector& b) const {
  if (b.size() != pixels_.size()) fail(ErrorKind::LengthMismatch, "perturbation vector length differs from segment count");
  Image out = x_;
  for (std::size_t s = 0; s < pixels_.size(); ++s) {
    if (b.keeps(s)) continue;
    for (auto i : pixels_[s]) out[i] = infill_[i];
  }
  return out;
}

Image compose_image(const Image& x, const Image& infill, const SegmentMap& segments, const PerturbationVector& b) {
  return Composer(x, infill, segments).compose(b);
}

std::vector<PerturbationVector> enumerate_perturbations(std::size_t n, std::size_t max_size, std::optional<std::size_t> cap,
                                                        std::uint64_t seed) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "need at least one segment");
  check_segment_count(n);
  const std::size_t top = std::min(max_size, n);

  std::vector<PerturbationVector> small;
  std::vector<PerturbationVector> large;
  for (std::size_t k = 1; k <= top; ++k) {
    // Lexicographic k-combinations of {0..n-1}.
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (;;) {
      std::uint64_t mask = 0;
      for (auto i : idx) mask |= std::uint64_t{1} << i;
      (k <= 2 ? small : large).push_back(PerturbationVector::from_replaced_mask(n, mask));
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  if (!cap || small.size() + large.size() <= *cap) {
    small.insert(small.end(), std::make_move_iterator(large.begin()), std::make_move_iterator(large.end()));
    return small;
  }
  const std::size_t budget = *cap > small.size() ? *cap - small.size() : 0;
  std::vector<std::size_t> order(large.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < budget; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(budget);
  std::sort(order.begin(), order.end());
  for (auto i : order) small.push_back(std::move(large[i]));
  return small;
}

std::vector<PerturbationRecord> evaluate_dataset(const Classifier& classifier, const Image& x, const Image& infill,
                                                 const SegmentMap& segments, std::span<const PerturbationVector> vectors,
                                                 std::size_t workers) {
  const Composer composer(x, infill, segments);
  std::vector<PerturbationRecord> records(vectors.size());
  const std::size_t pool = classifier.concurrency_safe() ? workers : 1;
  parallel_for(vectors.size(), pool, [&](std::size_t i) {
    records[i].vector = vectors[i];
    records[i].probability = classify(classifier, composer.compose(vectors[i])).probability;
  });
  return records;
}

std::vector<Counterfactual> find_counterfactuals(std::span<const PerturbationRecord> records, double y_original,
                                                 double boundary, const ProbabilityOracle& oracle) {
  if (records.empty()) return {};
  const std::size_t n = records.front().vector.size();
  std::unordered_map<std::uint64_t, double> known;
  for (const auto& r : records) {
    if (r.vector.size() != n) fail(ErrorKind::LengthMismatch, "records disagree on the segment count");
    known.emplace(r.vector.replaced_mask(), r.probability);
  }
  known[0] = y_original;

  auto probability_of = [&](std::uint64_t mask) {
    if (const auto it = known.find(mask); it != known.end()) return it->second;
    if (!oracle) {
      fail(ErrorKind::IncompleteEnumeration, "minimality check needs a perturbation that was not evaluated");
    }
    const double p = oracle(PerturbationVector::from_replaced_mask(n, mask));
    known.emplace(mask, p);
    return p;
  };

  std::vector<Counterfactual> candidates;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : records) {
    const std::uint64_t mask = r.vector.replaced_mask();
    if (mask == 0 || !flips(r.probability, y_original, boundary)) continue;
    if (!seen.insert(mask).second) continue;
    bool minimal = true;
    for (std::uint64_t rest = mask; rest != 0 && minimal; rest &= rest - 1) {
      const std::uint64_t restored = mask & ~(rest & (~rest + 1));
      if (flips(probability_of(restored), y_original, boundary)) minimal = false;
    }
    if (minimal) candidates.push_back({r.vector.replaced_ids(), r.vector, r.probability});
  }

  std::sort(candidates.begin(), candidates.end(), [](const Counterfactual& a, const Counterfactual& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.replaced < b.replaced;
  });
  std::vector<Counterfactual> result;
  std::vector<std::uint64_t> accepted;
  for (auto& c : candidates) {
    const std::uint64_t mask = c.vector.replaced_mask();
    const bool superset = std::any_of(accepted.begin(), accepted.end(),
                                      [mask](std::uint64_t a) { return a != mask && (a & mask) == a; });
    if (superset) continue;
    accepted.push_back(mask);
    result.push_back(std::move(c));
  }
  return result;
}

void mark_counterfactuals(std::span<PerturbationRecord> records, std::span<const Counterfactual> counterfactuals) {
  std::unordered_set<std::uint64_t> masks;
  for (const auto& c : counterfactuals) masks.insert(c.vector.replaced_mask());
  for (auto& r : records) r.is_counterfactual = masks.contains(r.vector.replaced_mask());
}

}  // namespace contrastex
