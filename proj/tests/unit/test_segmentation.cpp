#include <doctest.h>

#include "../helpers/oracles.hpp"
#include "contrastex/imaging/otsu.hpp"
#include "contrastex/segmentation/segmentation.hpp"
#include "contrastex/synthetic/scene.hpp"

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

void fill(Image& img, const BinaryMask& m, double v) {
  for (std::size_t i = 0; i < img.size(); ++i)
    if (m[i]) img[i] = v;
}

// Three bright blocks on black; the contrast is all black.
struct BlockScene {
  Image x{48, 48, 0.0};
  Image x_prime{48, 48, 0.0};
  std::vector<BinaryMask> blocks{oracle::rect_mask(48, 48, 2, 2, 14, 14), oracle::rect_mask(48, 48, 20, 2, 32, 14),
                                 oracle::rect_mask(48, 48, 34, 2, 46, 14)};
  BlockScene() {
    for (const auto& b : blocks) fill(x, b, 0.9);
  }
  // A faint band of patches with distinct intensities below the blocks.
  void add_patches() {
    const double levels[8] = {0.08, 0.3, 0.12, 0.34, 0.16, 0.38, 0.2, 0.42};
    for (int k = 0; k < 8; ++k) {
      const int col = k % 4, row = k / 4;
      fill(x, oracle::rect_mask(48, 48, col * 12, 18 + row * 12, col * 12 + 12, 30 + row * 12), levels[k]);
    }
  }
};

SegmentationParams manual(double high, double low, std::size_t min_size) {
  SegmentationParams p;
  p.threshold_method = ThresholdMethod::Manual;
  p.manual_high = high;
  p.manual_low = low;
  p.min_seg_size = min_size;
  p.seg_size_increment = 10;
  p.felzenszwalb_scale = 0.5;
  p.felzenszwalb_sigma = 0.0;
  return p;
}

}  // namespace

TEST_CASE("determine_thresholds") {
  SUBCASE("manual values pass through") {
    const auto t = determine_thresholds(Image(4, 4), Image(4, 4, 0.5), manual(0.6, 0.2, 1));
    CHECK(t.high == 0.6);
    CHECK(t.low == 0.2);
  }
  SUBCASE("identical images are degenerate") {
    const Image x(8, 8, 0.3);
    CHECK(kind_of([&] { determine_thresholds(x, x, SegmentationParams{}); }) == ErrorKind::DegenerateHistogram);
  }
  SUBCASE("tri-modal difference matches the exhaustive oracle") {
    Rng rng(14);
    Image x(40, 40), xp(40, 40, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int mode = static_cast<int>(rng.below(3));
      x[i] = std::clamp((mode == 0 ? 0.05 : mode == 1 ? 0.45 : 0.85) + rng.normal(0.0, 0.03), 0.0, 1.0);
    }
    Histogram h{};
    for (std::size_t i = 0; i < x.size(); ++i) ++h[static_cast<std::size_t>(histogram_bin(x[i]))];
    const auto bins = oracle::exhaustive_otsu(h, 3);
    const auto t = determine_thresholds(x, xp, SegmentationParams{});
    CHECK(t.low == bin_boundary_value(bins[0]));
    CHECK(t.high == bin_boundary_value(bins[1]));
  }
}

TEST_CASE("high-intensity segments") {
  CHECK(create_high_intensity_segments(BinaryMask(20, 20, 0), 250).max_label() == 0);
  BinaryMask one(40, 40, 0);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) one(x, y) = 1;
  CHECK(create_high_intensity_segments(one, 250).max_label() == 1);

  BinaryMask two(60, 30, 0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) two(x, y) = 1;  // 100 px
  for (int y = 0; y < 20; ++y)
    for (int x = 30; x < 50; ++x) two(x, y) = 1;  // 400 px
  const auto l = create_high_intensity_segments(two, 250);
  CHECK(l.max_label() == 1);
  CHECK(l(35, 5) == 1);
  CHECK(l(5, 5) == 0);
  CHECK(l.label_sizes()[1] == 400);
}

TEST_CASE("low-intensity segments") {
  const auto p = manual(0.6, 0.1, 20);
  SUBCASE("empty region") {
    CHECK(create_low_intensity_segments(BinaryMask(16, 16, 0), Image(16, 16), 20, p).max_label() == 0);
  }
  SUBCASE("flat region is one segment") {
    const auto d = oracle::rect_mask(30, 30, 3, 3, 27, 27);
    const auto l = create_low_intensity_segments(d, Image(30, 30, 0.4), 20, p);
    CHECK(l.max_label() == 1);
  }
  SUBCASE("two textures agree with Felzenszwalb on the eroded region") {
    Image x(32, 32, 0.0);
    Rng rng(6);
    for (int y = 0; y < 32; ++y)
      for (int xx = 0; xx < 32; ++xx) x(xx, y) = xx < 16 ? 0.2 + 0.02 * rng.uniform() : 0.6 + 0.02 * rng.uniform();
    const auto d = oracle::rect_mask(32, 32, 2, 2, 30, 30);
    const auto l = create_low_intensity_segments(d, x, 20, p);
    const auto roi = oracle::erode_scan(d, 1);
    const auto direct = felzenszwalb(x, {p.felzenszwalb_scale, p.felzenszwalb_sigma, 20}, roi);
    CHECK(oracle::same_partition(l, direct));
    CHECK(l.max_label() >= 2);
    CHECK(l(5, 10) != l(25, 10));
  }
  SUBCASE("excluded pixels are never claimed") {
    const auto d = oracle::rect_mask(30, 30, 0, 0, 30, 30);
    const auto ex = oracle::rect_mask(30, 30, 10, 10, 20, 20);
    const auto l = create_low_intensity_segments(d, Image(30, 30, 0.4), 20, p, &ex);
    for (std::size_t i = 0; i < l.size(); ++i)
      if (ex[i]) CHECK(l[i] == 0);
  }
}

TEST_CASE("single-segment counterfactual count") {
  BlockScene s;
  const auto segments =
      make_segment_map(create_high_intensity_segments(difference_masks(s.x, s.x_prime, 0.5, 0.1).high, 10),
                       Provenance::HighIntensity, 10);
  REQUIRE(segments.count() == 3);

  const auto constant = planted_function([](const Image&) { return 0.9; }, "0.9");
  CHECK(count_single_segment_counterfactuals(*constant, s.x, s.x_prime, segments) == 0);

  // Only the third block carries enough weight to flip the class alone.
  PlantedRegionClassifier third(s.blocks, {0.5, 0.5, 3.0}, -1.5, s.x_prime);
  CHECK(count_single_segment_counterfactuals(third, s.x, s.x_prime, segments) == 1);
  CHECK(count_single_segment_counterfactuals(third, s.x, s.x_prime, segments, 0.5, 4) == 1);

  PlantedRegionClassifier all(s.blocks, {1.0, 1.0, 1.0}, -2.5, s.x_prime);
  CHECK(count_single_segment_counterfactuals(all, s.x, s.x_prime, segments) == 3);
}

TEST_CASE("combining and capping") {
  LabelMap high(6, 1, std::vector<int>{1, 1, 0, 0, 2, 0});
  LabelMap low(6, 1, std::vector<int>{0, 1, 1, 2, 2, 3});
  const auto m = combine_segments(high, 2, low, 1);
  // S_h keeps ids 1..2 and wins pixel 1 and 4; low label 2 keeps pixel 3.
  CHECK(m.labels() == LabelMap(6, 1, std::vector<int>{1, 1, 3, 4, 2, 5}));
  CHECK(m.info(1).provenance == Provenance::HighIntensity);
  CHECK(m.info(3).provenance == Provenance::LowIntensity);

  // 25 single-row segments of growing width; capping merges the smallest.
  std::vector<int> values;
  for (int id = 1; id <= 25; ++id)
    for (int k = 0; k < id; ++k) values.push_back(id);
  const LabelMap strip(static_cast<int>(values.size()), 1, values);
  const auto capped = cap_segments(make_segment_map(strip, Provenance::LowIntensity, 1), 20);
  CHECK(capped.count() == 20);
  std::size_t total = 0;
  for (const auto& s : capped.segments()) total += s.pixel_count;
  CHECK(total == values.size());
  // Segment 1 (1 px) went to its only neighbour, segment 2.
  CHECK(capped.labels()[0] == capped.labels()[1]);

  // Isolated segments merge into the nearest by centroid.
  LabelMap islands(9, 1, std::vector<int>{1, 0, 2, 2, 0, 0, 0, 3, 3});
  const auto merged = cap_segments(make_segment_map(islands, Provenance::HighIntensity, 1), 2);
  CHECK(merged.count() == 2);
  CHECK(merged.labels()[0] == merged.labels()[2]);
}

TEST_CASE("GAN-augmented segmentation") {
  SUBCASE("identical images have no segments") {
    const Image x(32, 32, 0.4);
    const auto clf = planted_function([](const Image&) { return 0.9; }, "0.9");
    CHECK(kind_of([&] { gan_augmented_segmentation(x, x, *clf, SegmentationParams{}); }) ==
          ErrorKind::NoSegmentsFound);
  }
  SUBCASE("a single-segment counterfactual stops the loop at once") {
    BlockScene s;
    s.add_patches();
    PlantedRegionClassifier m(s.blocks, {0.5, 0.5, 3.0}, -1.5, s.x_prime);
    const auto r = gan_augmented_segmentation(s.x, s.x_prime, m, manual(0.5, 0.05, 20));
    CHECK(r.iterations == 0);
    CHECK(r.single_counterfactuals >= 1);
    CHECK(r.high_count == 3);
    CHECK(r.low_count > 4);
  }
  SUBCASE("without one the minimum size grows until few S_l segments remain") {
    BlockScene s;
    s.add_patches();
    const auto constant = planted_function([](const Image&) { return 0.9; }, "0.9");
    const auto p = manual(0.5, 0.05, 20);
    const auto r = gan_augmented_segmentation(s.x, s.x_prime, *constant, p);
    CHECK(r.iterations > 0);
    CHECK(r.low_count <= p.min_num_low_segments);
    CHECK(r.final_min_seg_size == p.min_seg_size + static_cast<std::size_t>(r.iterations) * p.seg_size_increment);
    for (const auto& seg : r.segments.segments()) {
      CHECK(seg.pixel_count >= seg.min_size_at_creation);
      if (seg.provenance == Provenance::LowIntensity) CHECK(seg.min_size_at_creation == r.final_min_seg_size);
    }
    const auto again = gan_augmented_segmentation(s.x, s.x_prime, *constant, p);
    CHECK(again.segments.labels() == r.segments.labels());
  }
  SUBCASE("thresholding keeps difference segments only") {
    BlockScene s;
    s.add_patches();
    auto p = manual(0.5, 0.05, 20);
    p.type = SegmentType::Thresholding;
    const auto constant = planted_function([](const Image&) { return 0.9; }, "0.9");
    const auto r = gan_augmented_segmentation(s.x, s.x_prime, *constant, p);
    CHECK(r.segments.count() == 3);
    for (const auto& seg : r.segments.segments()) CHECK(seg.provenance == Provenance::HighIntensity);
  }
  SUBCASE("plain Felzenszwalb ignores the contrast") {
    BlockScene s;
    auto p = manual(0.5, 0.05, 20);
    p.type = SegmentType::Felzenszwalb;
    const auto constant = planted_function([](const Image&) { return 0.9; }, "0.9");
    const auto r = gan_augmented_segmentation(s.x, s.x, *constant, p);
    CHECK(r.segments.count() >= 2);
  }
  SUBCASE("synthetic scene targets are covered by segments") {
    const auto items = synthetic::random_dataset(16, 3);
    const auto constant = planted_function([](const Image&) { return 0.9; }, "0.9");
    // Share of each target inside its best-overlapping segment.
    auto coverage = [&](const SegmentationParams& p) {
      std::vector<double> out;
      for (const auto& item : items) {
        if (item.truth.label != synthetic::Label::Diseased) continue;
        const auto r = gan_augmented_segmentation(item.x, item.x_prime, *constant, p);
        const auto& labels = r.segments.labels();
        for (const auto& target : item.truth.targets) {
          std::map<int, std::size_t> overlap;
          for (std::size_t i = 0; i < labels.size(); ++i)
            if (target.mask[i] && labels[i] > 0) ++overlap[labels[i]];
          std::size_t best = 0;
          for (const auto& [_, c] : overlap) best = std::max(best, c);
          out.push_back(static_cast<double>(best) / static_cast<double>(target.mask.count()));
        }
      }
      return out;
    };
    auto p = manual(0.3, 0.0, 62);
    p.seg_size_increment = 6;
    p.felzenszwalb_scale = 1.0;
    p.felzenszwalb_sigma = 0.8;
    const auto manual_cover = coverage(p);
    REQUIRE(manual_cover.size() > 5);
    for (double c : manual_cover) CHECK(c >= 0.8);

    // Automatic thresholds put anti-aliased rims in D_l, where erosion
    // removes them, so only the interior lands in S_h.
    SegmentationParams automatic;
    automatic.min_seg_size = 62;
    automatic.seg_size_increment = 6;
    for (double c : coverage(automatic)) CHECK(c >= 0.6);
  }
}

TEST_CASE("parameter validation") {
  SegmentationParams p;
  p.min_seg_size = 0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
  p = SegmentationParams{};
  p.seg_size_increment = 0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
  p = manual(0.2, 0.6, 10);
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::Config);
}
