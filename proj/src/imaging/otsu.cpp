#include "contrastex/imaging/otsu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace contrastex {

int histogram_bin(double value) noexcept {
  const double clamped = std::clamp(value, 0.0, 1.0);
  return static_cast<int>(std::lround(clamped * 255.0));
}

Histogram intensity_histogram(std::span<const double> values) {
  Histogram h{};
  for (double v : values) ++h[static_cast<std::size_t>(histogram_bin(v))];
  return h;
}

double bin_boundary_value(int k) noexcept {
  double v = (static_cast<double>(k) - 0.5) / 255.0;
  while (histogram_bin(v) < k) v = std::nextafter(v, 2.0);
  while (v > 0.0 && histogram_bin(std::nextafter(v, -1.0)) >= k) v = std::nextafter(v, -1.0);
  return v;
}

namespace {

struct SearchState {
  std::array<std::uint64_t, kHistogramBins + 1> count_prefix{};
  std::array<std::uint64_t, kHistogramBins + 1> moment_prefix{};
  int classes = 0;
  std::vector<int> current;
  std::vector<int> best;
  double best_score = -1.0;

  double class_term(int lo, int hi) const {
    const std::uint64_t n = count_prefix[static_cast<std::size_t>(hi)] - count_prefix[static_cast<std::size_t>(lo)];
    const std::uint64_t s = moment_prefix[static_cast<std::size_t>(hi)] - moment_prefix[static_cast<std::size_t>(lo)];
    const auto sd = static_cast<double>(s);
    return sd * sd / static_cast<double>(n);
  }

  bool nonempty(int lo, int hi) const {
    return count_prefix[static_cast<std::size_t>(hi)] > count_prefix[static_cast<std::size_t>(lo)];
  }

  // Places boundary number `depth` somewhere after `lo`; `partial` is the
  // objective contribution of the classes already closed.
  void place(int depth, int lo, double partial) {
    if (depth == classes - 1) {
      if (!nonempty(lo, kHistogramBins)) return;
      const double score = partial + class_term(lo, kHistogramBins);
      if (score > best_score) {
        best_score = score;
        best = current;
      }
      return;
    }
    const int remaining = classes - 1 - depth;
    for (int k = lo + 1; k <= kHistogramBins - remaining; ++k) {
      if (!nonempty(lo, k)) continue;
      current[static_cast<std::size_t>(depth)] = k;
      place(depth + 1, k, partial + class_term(lo, k));
    }
  }
};

}  // namespace

std::vector<int> multi_otsu_bins(const Histogram& histogram, int classes) {
  if (classes < 2) fail(ErrorKind::InvalidArgument, "multi-Otsu needs at least 2 classes");
  const auto populated = std::count_if(histogram.begin(), histogram.end(), [](auto c) { return c > 0; });
  if (populated < classes) {
    fail(ErrorKind::DegenerateHistogram,
         std::to_string(populated) + " populated bins cannot be split into " + std::to_string(classes) + " classes");
  }

  SearchState state;
  for (int b = 0; b < kHistogramBins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    state.count_prefix[i + 1] = state.count_prefix[i] + histogram[i];
    state.moment_prefix[i + 1] = state.moment_prefix[i] + histogram[i] * static_cast<std::uint64_t>(b);
  }
  state.classes = classes;
  state.current.assign(static_cast<std::size_t>(classes - 1), 0);
  state.place(0, 0, 0.0);
  return state.best;
}

std::vector<double> multi_otsu(const Histogram& histogram, int classes) {
  const auto bins = multi_otsu_bins(histogram, classes);
  std::vector<double> thresholds;
  thresholds.reserve(bins.size());
  for (int k : bins) thresholds.push_back(bin_boundary_value(k));
  return thresholds;
}

}  // namespace contrastex
