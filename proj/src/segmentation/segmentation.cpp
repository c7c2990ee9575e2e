#include "contrastex/segmentation/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <utility>

#include "contrastex/imaging/otsu.hpp"
#include "contrastex/util/parallel.hpp"

namespace contrastex {

void SegmentationParams::validate() const {
  if (min_seg_size < 1) fail(ErrorKind::Config, "min_seg_size must be >= 1");
  if (seg_size_increment < 1) fail(ErrorKind::Config, "seg_size_increment must be >= 1");
  if (min_num_low_segments < 0) fail(ErrorKind::Config, "min_num_S_l must be >= 0");
  if (!(felzenszwalb_scale > 0.0)) fail(ErrorKind::Config, "felzenszwalb scale must be positive");
  if (!(felzenszwalb_sigma >= 0.0)) fail(ErrorKind::Config, "felzenszwalb sigma must be >= 0");
  if (erosion_radius < 0) fail(ErrorKind::Config, "erosion radius must be >= 0");
  if (max_segments < 1 || max_segments > 64) fail(ErrorKind::Config, "max_segments must be in [1, 64]");
  if (!(decision_boundary > 0.0 && decision_boundary < 1.0)) fail(ErrorKind::Config, "decision boundary must be in (0, 1)");
  if (threshold_method == ThresholdMethod::Manual && !(0.0 <= manual_low && manual_low <= manual_high && manual_high <= 1.0)) {
    fail(ErrorKind::Config, "manual thresholds need 0 <= low <= high <= 1");
  }
}

Thresholds determine_thresholds(const Image& x, const Image& x_prime, const SegmentationParams& params) {
  require_same_shape(x, x_prime, "image and contrast must have the same size");
  if (params.threshold_method == ThresholdMethod::Manual) return {params.manual_high, params.manual_low};
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = std::abs(x[i] - x_prime[i]);
  const auto t = multi_otsu(intensity_histogram(diff), 3);
  return {t[1], t[0]};
}

LabelMap create_high_intensity_segments(const BinaryMask& d_high, std::size_t min_seg_size, Connectivity connectivity) {
  return filter_small_components(connected_components(d_high, connectivity), min_seg_size);
}

BinaryMask low_intensity_region(const BinaryMask& d_low, std::size_t min_seg_size, const SegmentationParams& params) {
  const auto kept = filter_small_components(connected_components(d_low, params.connectivity), min_seg_size);
  BinaryMask region(kept.width(), kept.height());
  for (std::size_t i = 0; i < kept.size(); ++i) region[i] = kept[i] > 0 ? 1 : 0;
  return params.erosion_radius > 0 ? erode(region, params.erosion_radius) : region;
}

LabelMap create_low_intensity_segments(const BinaryMask& d_low, const Image& x, std::size_t min_seg_size,
                                       const SegmentationParams& params, const BinaryMask* exclude) {
  require_same_shape(d_low, x, "low-intensity mask must match the image");
  BinaryMask roi = low_intensity_region(d_low, min_seg_size, params);
  if (exclude) {
    require_same_shape(*exclude, x, "exclusion mask must match the image");
    for (std::size_t i = 0; i < roi.size(); ++i) {
      if ((*exclude)[i]) roi[i] = 0;
    }
  }
  if (!roi.any()) return LabelMap(x.width(), x.height());
  const FelzenszwalbParams fz{params.felzenszwalb_scale, params.felzenszwalb_sigma,
                              static_cast<int>(std::min<std::size_t>(min_seg_size, std::numeric_limits<int>::max()))};
  return felzenszwalb(x, fz, roi);
}

int count_single_segment_counterfactuals(const Classifier& classifier, const Image& x, const Image& x_prime,
                                         const SegmentMap& segments, double boundary, std::size_t workers) {
  require_same_shape(x, x_prime, "image and contrast must have the same size");
  require_same_shape(x, segments.labels(), "segment map must match the image");
  if (segments.count() == 0) fail(ErrorKind::InvalidArgument, "no segments to probe");
  const bool original = classify(classifier, x, boundary).positive;
  const auto pixels = segments.pixel_lists();
  std::vector<std::uint8_t> flipped(pixels.size(), 0);
  const std::size_t pool = classifier.concurrency_safe() ? workers : 1;
  parallel_for(pixels.size(), pool, [&](std::size_t s) {
    Image probe = x;
    for (auto i : pixels[s]) probe[i] = x_prime[i];
    flipped[s] = classify(classifier, probe, boundary).positive != original ? 1 : 0;
  });
  return static_cast<int>(std::count(flipped.begin(), flipped.end(), std::uint8_t{1}));
}

SegmentMap combine_segments(const LabelMap& high, std::size_t high_min_size, const LabelMap& low, std::size_t low_min_size) {
  require_same_shape(high, low, "segment label maps differ in size");
  const int n_high = high.max_label();
  LabelMap combined(high.width(), high.height());
  for (std::size_t i = 0; i < high.size(); ++i) {
    if (high[i] > 0) {
      combined[i] = high[i];
    } else if (low[i] > 0) {
      combined[i] = n_high + low[i];
    }
  }
  // A low-intensity segment that lost every pixel to S_h must not leave a gap.
  const auto sizes = combined.label_sizes();
  std::vector<int> remap(sizes.size(), 0);
  std::vector<SegmentInfo> info;
  int next = 0;
  for (std::size_t label = 1; label < sizes.size(); ++label) {
    if (sizes[label] == 0) continue;
    remap[label] = ++next;
    const bool is_high = static_cast<int>(label) <= n_high;
    info.push_back({next, is_high ? Provenance::HighIntensity : Provenance::LowIntensity, 0,
                    is_high ? high_min_size : low_min_size});
  }
  for (auto& v : combined.values()) v = remap[static_cast<std::size_t>(v)];
  return SegmentMap(std::move(combined), std::move(info));
}

SegmentMap cap_segments(const SegmentMap& segments, int max_segments) {
  if (max_segments < 1) fail(ErrorKind::InvalidArgument, "max_segments must be >= 1");
  if (segments.count() <= max_segments) return segments;

  LabelMap labels = segments.labels();
  const int w = labels.width();
  const int h = labels.height();
  const int n = segments.count();
  std::vector<SegmentInfo> info = segments.segments();
  std::vector<bool> alive(static_cast<std::size_t>(n) + 1, true);
  alive[0] = false;
  std::vector<std::size_t> size(static_cast<std::size_t>(n) + 1, 0);
  std::vector<double> sx(size.size(), 0.0), sy(size.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto l = static_cast<std::size_t>(labels(x, y));
      if (l == 0) continue;
      ++size[l];
      sx[l] += x;
      sy[l] += y;
    }
  }

  for (int remaining = n; remaining > max_segments; --remaining) {
    int victim = 0;
    for (int id = 1; id <= n; ++id) {
      if (alive[static_cast<std::size_t>(id)] && (victim == 0 || size[static_cast<std::size_t>(id)] < size[static_cast<std::size_t>(victim)])) {
        victim = id;
      }
    }
    std::vector<bool> adjacent(size.size(), false);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (labels(x, y) != victim) continue;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
          if (!labels.contains(nx[k], ny[k])) continue;
          const int other = labels(nx[k], ny[k]);
          if (other != 0 && other != victim) adjacent[static_cast<std::size_t>(other)] = true;
        }
      }
    }
    int target = 0;
    for (int id = 1; id <= n; ++id) {
      const auto i = static_cast<std::size_t>(id);
      if (adjacent[i] && (target == 0 || size[i] > size[static_cast<std::size_t>(target)])) target = id;
    }
    if (target == 0) {
      const auto v = static_cast<std::size_t>(victim);
      const double cx = sx[v] / static_cast<double>(size[v]);
      const double cy = sy[v] / static_cast<double>(size[v]);
      double best = std::numeric_limits<double>::infinity();
      for (int id = 1; id <= n; ++id) {
        const auto i = static_cast<std::size_t>(id);
        if (!alive[i] || id == victim) continue;
        const double dx = sx[i] / static_cast<double>(size[i]) - cx;
        const double dy = sy[i] / static_cast<double>(size[i]) - cy;
        const double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          target = id;
        }
      }
    }
    for (auto& v : labels.values()) {
      if (v == victim) v = target;
    }
    const auto v = static_cast<std::size_t>(victim);
    const auto t = static_cast<std::size_t>(target);
    size[t] += size[v];
    sx[t] += sx[v];
    sy[t] += sy[v];
    alive[v] = false;
  }

  std::vector<int> remap(size.size(), 0);
  std::vector<SegmentInfo> kept;
  int next = 0;
  for (int id = 1; id <= n; ++id) {
    if (!alive[static_cast<std::size_t>(id)]) continue;
    remap[static_cast<std::size_t>(id)] = ++next;
    SegmentInfo s = info[static_cast<std::size_t>(id - 1)];
    s.id = next;
    kept.push_back(s);
  }
  for (auto& v : labels.values()) v = remap[static_cast<std::size_t>(v)];
  return SegmentMap(std::move(labels), std::move(kept));
}

namespace {

SegmentationResult finish(SegmentMap combined, const SegmentationParams& params, SegmentationResult result) {
  if (combined.count() == 0) fail(ErrorKind::NoSegmentsFound, "segmentation produced no segments");
  result.segments = cap_segments(combined, params.max_segments);
  return result;
}

}  // namespace

SegmentationResult gan_augmented_segmentation(const Image& x, const Image& x_prime, const Classifier& classifier,
                                              const SegmentationParams& params) {
  params.validate();
  require_same_shape(x, x_prime, "image and contrast must have the same size");
  SegmentationResult result;
  result.final_min_seg_size = params.min_seg_size;

  if (params.type == SegmentType::Felzenszwalb) {
    const FelzenszwalbParams fz{params.felzenszwalb_scale, params.felzenszwalb_sigma,
                                static_cast<int>(std::min<std::size_t>(params.min_seg_size, std::numeric_limits<int>::max()))};
    const auto labels = felzenszwalb(x, fz);
    result.low_count = labels.max_label();
    auto combined = make_segment_map(labels, Provenance::LowIntensity, params.min_seg_size);
    return finish(std::move(combined), params, std::move(result));
  }

  try {
    result.thresholds = determine_thresholds(x, x_prime, params);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateHistogram) throw;
    fail(ErrorKind::NoSegmentsFound, std::string("no usable difference between image and contrast: ") + e.what());
  }
  const auto masks = difference_masks(x, x_prime, result.thresholds.high, result.thresholds.low);
  const LabelMap s_high = create_high_intensity_segments(masks.high, params.min_seg_size, params.connectivity);
  result.high_count = s_high.max_label();

  if (params.type == SegmentType::Thresholding) {
    auto combined = make_segment_map(s_high, Provenance::HighIntensity, params.min_seg_size);
    return finish(std::move(combined), params, std::move(result));
  }

  BinaryMask high_pixels(x.width(), x.height());
  for (std::size_t i = 0; i < s_high.size(); ++i) high_pixels[i] = s_high[i] > 0 ? 1 : 0;

  std::size_t min_size = params.min_seg_size;
  auto build = [&](std::size_t size) {
    const auto s_low = create_low_intensity_segments(masks.low, x, size, params, &high_pixels);
    return std::pair{s_low.max_label(), combine_segments(s_high, params.min_seg_size, s_low, size)};
  };
  auto probe = [&](const SegmentMap& combined) {
    return combined.count() == 0 ? 0
                                 : count_single_segment_counterfactuals(classifier, x, x_prime, combined,
                                                                        params.decision_boundary, params.workers);
  };

  auto [n_low, combined] = build(min_size);
  int n_c = probe(combined);
  while (n_c == 0 && params.min_num_low_segments < n_low) {
    min_size += params.seg_size_increment;
    ++result.iterations;
    std::tie(n_low, combined) = build(min_size);
    n_c = probe(combined);
  }
  result.final_min_seg_size = min_size;
  result.single_counterfactuals = n_c;
  result.low_count = n_low;
  return finish(std::move(combined), params, std::move(result));
}

}  // namespace contrastex
