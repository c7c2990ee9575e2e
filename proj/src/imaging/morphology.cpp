#include "contrastex/imaging/morphology.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

namespace contrastex {

DifferenceMasks difference_masks(const Image& x, const Image& x_prime, double t_high, double t_low) {
  require_same_shape(x, x_prime, "difference masks need images of equal size");
  if (!(t_low >= 0.0 && t_low <= t_high && t_high <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "thresholds must satisfy 0 <= t_l <= t_h <= 1");
  }
  DifferenceMasks masks{BinaryMask(x.width(), x.height()), BinaryMask(x.width(), x.height())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - x_prime[i]);
    if (d >= t_high) {
      masks.high[i] = 1;
    } else if (d >= t_low) {
      masks.low[i] = 1;
    }
  }
  return masks;
}

namespace {

// Union-find with path halving; the smaller root wins so that each label's
// root is its first pixel in raster order.
struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent[b] = a;
    } else {
      parent[a] = b;
    }
  }
};

}  // namespace

LabelMap connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  DisjointSet sets(mask.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.test(x, y)) continue;
      const auto here = mask.index(x, y);
      if (x > 0 && mask.test(x - 1, y)) sets.unite(here, mask.index(x - 1, y));
      if (y > 0 && mask.test(x, y - 1)) sets.unite(here, mask.index(x, y - 1));
      if (connectivity == Connectivity::Eight && y > 0) {
        if (x > 0 && mask.test(x - 1, y - 1)) sets.unite(here, mask.index(x - 1, y - 1));
        if (x + 1 < w && mask.test(x + 1, y - 1)) sets.unite(here, mask.index(x + 1, y - 1));
      }
    }
  }

  LabelMap labels(w, h);
  std::unordered_map<std::size_t, int> root_label;
  int next = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    const auto root = sets.find(i);
    auto [it, inserted] = root_label.try_emplace(root, next + 1);
    if (inserted) ++next;
    labels[i] = it->second;
  }
  return labels;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius < 0) fail(ErrorKind::InvalidArgument, "erosion radius must be >= 0");
  const int w = mask.width();
  const int h = mask.height();
  if (radius == 0) return mask;

  // Separable: a square element is a horizontal run followed by a vertical one.
  BinaryMask horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    int run = 0;  // consecutive true pixels ending at x
    std::vector<int> runs(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) {
      run = mask.test(x, y) ? run + 1 : 0;
      runs[static_cast<std::size_t>(x)] = run;
    }
    for (int x = 0; x < w; ++x) {
      const int right = x + radius;
      if (x - radius < 0 || right >= w) continue;
      horizontal(x, y) = runs[static_cast<std::size_t>(right)] >= 2 * radius + 1 ? 1 : 0;
    }
  }
  BinaryMask out(w, h);
  for (int x = 0; x < w; ++x) {
    std::vector<int> runs(static_cast<std::size_t>(h));
    int run = 0;
    for (int y = 0; y < h; ++y) {
      run = horizontal.test(x, y) ? run + 1 : 0;
      runs[static_cast<std::size_t>(y)] = run;
    }
    for (int y = 0; y < h; ++y) {
      const int bottom = y + radius;
      if (y - radius < 0 || bottom >= h) continue;
      out(x, y) = runs[static_cast<std::size_t>(bottom)] >= 2 * radius + 1 ? 1 : 0;
    }
  }
  return out;
}

LabelMap filter_small_components(const LabelMap& labels, std::size_t min_size) {
  const auto sizes = labels.label_sizes();
  std::vector<int> remap(sizes.size(), 0);
  int next = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    if (sizes[l] > 0 && sizes[l] >= min_size) remap[l] = ++next;
  }
  LabelMap out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    out[i] = l > 0 ? remap[static_cast<std::size_t>(l)] : 0;
  }
  return out;
}

LabelMap relabel_raster(const LabelMap& labels) {
  std::unordered_map<int, int> remap;
  LabelMap out(labels.width(), labels.height());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l <= 0) continue;
    auto [it, inserted] = remap.try_emplace(l, next + 1);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

}  // namespace contrastex
