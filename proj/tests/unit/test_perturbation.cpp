#include <doctest.h>

#include <set>

#include "../helpers/oracles.hpp"
#include "contrastex/perturbation/perturbation.hpp"

using namespace contrastex;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvalidArgument;
}

// n vertical stripes of 4 columns each; x is bright, the contrast dark.
struct StripeScene {
  int n;
  Image x, x_prime;
  SegmentMap segments;
  std::vector<BinaryMask> masks;

  explicit StripeScene(int n_) : n(n_), x(4 * n_, 3, 0.0), x_prime(4 * n_, 3, 0.0) {
    LabelMap labels(4 * n, 3);
    Rng rng(static_cast<std::uint64_t>(n));
    for (int y = 0; y < 3; ++y) {
      for (int xx = 0; xx < 4 * n; ++xx) {
        labels(xx, y) = xx / 4 + 1;
        x(xx, y) = 0.6 + 0.3 * rng.uniform();
        x_prime(xx, y) = 0.1 * rng.uniform();
      }
    }
    segments = make_segment_map(labels, Provenance::HighIntensity, 1);
    for (int id = 1; id <= n; ++id) masks.push_back(segments.mask(id));
  }
};

std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("perturbation vectors") {
  const auto b = PerturbationVector::replacing(5, std::vector<int>{2, 5});
  CHECK(b.bits() == std::vector<std::uint8_t>{1, 0, 1, 1, 0});
  CHECK(b.replaced_ids() == std::vector<int>{2, 5});
  CHECK(b.replaced_count() == 2);
  CHECK(b.replaced_mask() == 0b10010);
  CHECK(PerturbationVector::from_replaced_mask(5, 0b10010) == b);
}

TEST_CASE("compose_image") {
  StripeScene s(4);
  CHECK(compose_image(s.x, s.x_prime, s.segments, PerturbationVector(4)) == s.x);
  const auto all = compose_image(s.x, s.x_prime, s.segments, PerturbationVector(std::vector<std::uint8_t>(4, 0)));
  CHECK(all == s.x_prime);

  SUBCASE("first segment replaced, pixel by pixel") {
    const auto img = compose_image(s.x, s.x_prime, s.segments, PerturbationVector({0, 1, 1, 1}));
    Image expected = s.x;
    for (int y = 0; y < 3; ++y)
      for (int xx = 0; xx < 4; ++xx) expected(xx, y) = s.x_prime(xx, y);
    CHECK(img == expected);
  }
  SUBCASE("pixels outside every segment keep x") {
    LabelMap labels(4, 1, std::vector<int>{0, 1, 1, 0});
    const auto m = make_segment_map(labels, Provenance::HighIntensity, 1);
    const Image x(4, 1, 0.8), xp(4, 1, 0.1);
    const auto img = compose_image(x, xp, m, PerturbationVector(std::vector<std::uint8_t>{0}));
    CHECK(img == Image(4, 1, std::vector<double>{0.8, 0.1, 0.1, 0.8}));
  }
  SUBCASE("length mismatch") {
    CHECK(kind_of([&] { compose_image(s.x, s.x_prime, s.segments, PerturbationVector(3)); }) ==
          ErrorKind::LengthMismatch);
  }
}

TEST_CASE("enumeration") {
  CHECK(enumerate_perturbations(12, 4).size() == 12 + 66 + 220 + 495);
  CHECK(enumerate_perturbations(3, 4).size() == 7);

  SUBCASE("order is by size then lexicographic") {
    const auto v = enumerate_perturbations(6, 3);
    for (std::size_t i = 1; i < v.size(); ++i) {
      const auto a = v[i - 1].replaced_ids(), b = v[i].replaced_ids();
      CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
    }
  }
  SUBCASE("capped enumeration keeps sizes one and two") {
    const auto v = enumerate_perturbations(20, 4, 1000, 0);
    CHECK(v.size() == 1000);
    std::size_t small = 0;
    std::set<std::uint64_t> masks;
    for (const auto& b : v) {
      small += b.replaced_count() <= 2;
      masks.insert(b.replaced_mask());
    }
    CHECK(small == 210);
    CHECK(masks.size() == 1000);
    CHECK(enumerate_perturbations(20, 4, 1000, 0) == v);
    CHECK(enumerate_perturbations(20, 4, 1000, 1) != v);
  }
  SUBCASE("counts for every n and size bound") {
    for (std::uint64_t n = 1; n <= 12; ++n) {
      for (std::uint64_t k = 1; k <= 5; ++k) {
        std::uint64_t expected = 0;
        for (std::uint64_t j = 1; j <= std::min(n, k); ++j) expected += choose(n, j);
        CHECK(enumerate_perturbations(n, k).size() == expected);
      }
    }
  }
}

TEST_CASE("evaluate_dataset") {
  StripeScene s(5);
  const auto vectors = enumerate_perturbations(5, 4);

  const auto constant = planted_function([](const Image&) { return 0.7; }, "0.7");
  for (const auto& r : evaluate_dataset(*constant, s.x, s.x_prime, s.segments, vectors)) CHECK(r.probability == 0.7);

  const oracle::PlantedLogit truth{-1.0, {2.0, -1.0, 0.5, 1.5, -0.25}};
  PlantedRegionClassifier m(s.masks, truth.w, truth.intercept, s.x_prime);
  const auto serial = evaluate_dataset(m, s.x, s.x_prime, s.segments, vectors, 1);
  const auto parallel = evaluate_dataset(m, s.x, s.x_prime, s.segments, vectors, 4);
  REQUIRE(serial.size() == vectors.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].vector == vectors[i]);
    CHECK(serial[i].probability == parallel[i].probability);
    const auto replaced = static_cast<std::uint32_t>(vectors[i].replaced_mask());
    CHECK(std::abs(serial[i].probability - truth.p_replaced(replaced)) < 1e-12);
  }
}

TEST_CASE("counterfactuals in the overlapping-segment scenario") {
  // Twelve segments; 4 and 11 each compensate for the other, so only
  // replacing both flips the class (0.43). 3 with 11 flips as well.
  const int n = 12;
  std::vector<PerturbationRecord> records;
  const double high = 0.91;
  auto probability = [&](const PerturbationVector& b) {
    const bool s3 = !b.keeps(2), s4 = !b.keeps(3), s11 = !b.keeps(10);
    if (s4 && s11) return 0.43;
    if (s3 && s11) return 0.47;
    return high;
  };
  for (const auto& b : enumerate_perturbations(n, 4)) records.push_back({b, probability(b), false});

  const auto found = find_counterfactuals(records, high, 0.5);
  std::vector<std::vector<int>> sets;
  for (const auto& c : found) sets.push_back(c.replaced);
  CHECK(sets == std::vector<std::vector<int>>{{3, 11}, {4, 11}});
  for (const auto& r : records) {
    const auto ids = r.vector.replaced_ids();
    if (ids == std::vector<int>{4} || ids == std::vector<int>{11}) CHECK(r.probability == high);
    if (ids == std::vector<int>{4, 11}) CHECK(r.probability == 0.43);
  }
  mark_counterfactuals(records, found);
  std::size_t marked = 0;
  for (const auto& r : records) marked += r.is_counterfactual;
  CHECK(marked == 2);
}

TEST_CASE("counterfactuals match the brute-force oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.integer(2, 8);
    oracle::PlantedLogit truth;
    truth.intercept = rng.uniform(-3.0, 1.0);
    for (int i = 0; i < n; ++i) truth.w.push_back(rng.uniform(-2.0, 4.0));
    const std::size_t max_size = trial % 2 ? 4 : static_cast<std::size_t>(n);

    std::vector<PerturbationRecord> records;
    for (const auto& b : enumerate_perturbations(static_cast<std::size_t>(n), max_size)) {
      records.push_back({b, truth.p_replaced(static_cast<std::uint32_t>(b.replaced_mask())), false});
    }
    const auto found = find_counterfactuals(records, truth.p_replaced(0), 0.5);
    std::vector<std::vector<int>> sets;
    for (const auto& c : found) sets.push_back(c.replaced);
    CHECK(sets == oracle::minimal_flip_sets(truth, max_size));

    for (const auto& c : found) {
      for (const auto& d : found)
        if (&c != &d) {
          const auto cm = c.vector.replaced_mask(), dm = d.vector.replaced_mask();
          CHECK_FALSE(((cm & dm) == dm && cm != dm));
        }
    }
  }
}

TEST_CASE("minimality checks for subsampled sizes") {
  // Size-3 records only: the size-2 sub-vectors are missing.
  oracle::PlantedLogit truth{-0.5, {1.0, 1.0, 1.0}};
  std::vector<PerturbationRecord> records;
  for (const auto& b : enumerate_perturbations(3, 3))
    if (b.replaced_count() == 3) records.push_back({b, truth.p_replaced(0b111), false});
  CHECK(kind_of([&] { find_counterfactuals(records, truth.p_replaced(0), 0.5); }) ==
        ErrorKind::IncompleteEnumeration);

  int calls = 0;
  const ProbabilityOracle on_demand = [&](const PerturbationVector& b) {
    ++calls;
    return truth.p_replaced(static_cast<std::uint32_t>(b.replaced_mask()));
  };
  const auto found = find_counterfactuals(records, truth.p_replaced(0), 0.5, on_demand);
  CHECK(calls == 3);
  REQUIRE(found.size() == 1);
  CHECK(found[0].replaced == std::vector<int>{1, 2, 3});

  // With a lower intercept two replacements already flip, so the full set
  // is no longer minimal.
  oracle::PlantedLogit lower{-1.5, {1.0, 1.0, 1.0}};
  for (auto& r : records) r.probability = lower.p_replaced(0b111);
  const ProbabilityOracle lower_oracle = [&](const PerturbationVector& b) {
    return lower.p_replaced(static_cast<std::uint32_t>(b.replaced_mask()));
  };
  CHECK(find_counterfactuals(records, lower.p_replaced(0), 0.5, lower_oracle).empty());
}
