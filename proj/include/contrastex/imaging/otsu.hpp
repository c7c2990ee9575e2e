#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

inline constexpr int kHistogramBins = 256;

using Histogram = std::array<std::uint64_t, kHistogramBins>;

// Bin of an intensity in [0,1]: round(v * 255).
int histogram_bin(double value) noexcept;

Histogram intensity_histogram(std::span<const double> values);

// Value in [0,1] separating bin k-1 from bin k: a value falls in a bin >= k
// exactly when it is >= the returned threshold.
double bin_boundary_value(int k) noexcept;

// Multi-level Otsu by exhaustive search over all placements of
// (classes - 1) boundaries. Boundary k puts bins [.., k) below and [k, ..)
// above; every class must be non-empty. The objective is the between-class
// variance, evaluated as sum_c S_c^2 / N_c from exact integer class sums so
// that identical partitions always score identically. Ties keep the
// lexicographically lowest boundary tuple.
//
// Returns the boundary bin indices, ascending, each in [1, 255].
std::vector<int> multi_otsu_bins(const Histogram& histogram, int classes);

// Same search, thresholds expressed as intensities via bin_boundary_value.
std::vector<double> multi_otsu(const Histogram& histogram, int classes);

}  // namespace contrastex
