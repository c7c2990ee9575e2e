#pragma once

#include <cstddef>

#include "contrastex/classifier/classifier.hpp"
#include "contrastex/imaging/felzenszwalb.hpp"
#include "contrastex/imaging/morphology.hpp"
#include "contrastex/segmentation/segment_map.hpp"

namespace contrastex {

enum class ThresholdMethod { MultiOtsu, Manual };

// AugmentedGan: difference-mask segments plus texture segments inside the
// low-difference region. Thresholding: difference-mask segments only.
// Felzenszwalb: texture segmentation of x alone, ignoring the contrast.
enum class SegmentType { AugmentedGan, Thresholding, Felzenszwalb };

struct SegmentationParams {
  int min_num_low_segments = 4;
  std::size_t min_seg_size = 250;
  std::size_t seg_size_increment = 25;
  ThresholdMethod threshold_method = ThresholdMethod::MultiOtsu;
  double manual_high = 0.6;
  double manual_low = 0.2;
  double felzenszwalb_scale = 1.0;
  double felzenszwalb_sigma = 0.8;
  int erosion_radius = 1;
  Connectivity connectivity = Connectivity::Eight;
  SegmentType type = SegmentType::AugmentedGan;
  int max_segments = 20;
  double decision_boundary = kDefaultDecisionBoundary;
  std::size_t workers = 1;

  void validate() const;
};

struct Thresholds {
  double high = 0.0;
  double low = 0.0;
};

// Three-class multi-Otsu on the |x - x'| histogram (lower boundary -> low,
// upper -> high), or the manual values. Throws DegenerateHistogram when the
// images are (nearly) identical.
Thresholds determine_thresholds(const Image& x, const Image& x_prime, const SegmentationParams& params);

// Connected components of d_h, keeping those with >= min_seg_size pixels.
LabelMap create_high_intensity_segments(const BinaryMask& d_high, std::size_t min_seg_size,
                                        Connectivity connectivity = Connectivity::Eight);

// Region that survives connected-component filtering and erosion of d_l;
// Felzenszwalb runs on x inside it.
BinaryMask low_intensity_region(const BinaryMask& d_low, std::size_t min_seg_size, const SegmentationParams& params);

// Felzenszwalb on x restricted to low_intensity_region(d_l), keeping
// regions of >= min_seg_size pixels and never claiming pixels of `exclude`.
LabelMap create_low_intensity_segments(const BinaryMask& d_low, const Image& x, std::size_t min_seg_size,
                                       const SegmentationParams& params, const BinaryMask* exclude = nullptr);

// Number of segments whose replacement alone flips the predicted class.
int count_single_segment_counterfactuals(const Classifier& classifier, const Image& x, const Image& x_prime,
                                         const SegmentMap& segments, double boundary = kDefaultDecisionBoundary,
                                         std::size_t workers = 1);

// S_h segments first (ids 1..|S_h|), then S_l; S_h wins on pixel conflicts.
SegmentMap combine_segments(const LabelMap& high, std::size_t high_min_size, const LabelMap& low, std::size_t low_min_size);

// Merges the smallest segment into its largest 4-adjacent neighbour (the
// nearest by centroid when isolated) until at most max_segments remain.
SegmentMap cap_segments(const SegmentMap& segments, int max_segments);

struct SegmentationResult {
  SegmentMap segments;  // shared geometry of S (over x) and S' (over x')
  Thresholds thresholds;
  std::size_t final_min_seg_size = 0;
  int iterations = 0;           // escalation rounds of the while loop
  int single_counterfactuals = 0;
  int high_count = 0;
  int low_count = 0;
};

// GAN-augmented segmentation. After the initial S_h and S_l, the minimum
// segment size grows by seg_size_increment and S_l is regenerated while no
// single segment is a counterfactual and more than min_num_low_segments S_l
// segments exist. Throws NoSegmentsFound when nothing survives (including a
// degenerate difference histogram under automatic thresholds).
SegmentationResult gan_augmented_segmentation(const Image& x, const Image& x_prime, const Classifier& classifier,
                                              const SegmentationParams& params);

}  // namespace contrastex
