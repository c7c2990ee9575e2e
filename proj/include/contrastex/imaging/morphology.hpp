#pragma once

#include "contrastex/imaging/image.hpp"

namespace contrastex {

enum class Connectivity { Four = 4, Eight = 8 };

struct DifferenceMasks {
  BinaryMask high;  // |x - x'| >= t_h
  BinaryMask low;   // t_l <= |x - x'| < t_h
};

DifferenceMasks difference_masks(const Image& x, const Image& x_prime, double t_high, double t_low);

// Labels assigned in raster order of first encounter, starting at 1.
LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

// Binary erosion by a (2r+1)x(2r+1) square; outside the image counts as false.
BinaryMask erode(const BinaryMask& mask, int radius = 1);

// Drops components smaller than min_size and renumbers the rest 1..k in
// order of their existing labels.
LabelMap filter_small_components(const LabelMap& labels, std::size_t min_size);

// Renumbers labels 1..k by raster order of first appearance.
LabelMap relabel_raster(const LabelMap& labels);

}  // namespace contrastex
