#pragma once

// Slow, obviously-correct reference implementations the library is checked
// against. Nothing here calls into the code under test except for plain data
// types.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "contrastex/imaging/image.hpp"
#include "contrastex/util/random.hpp"

namespace oracle {

using contrastex::BinaryMask;
using contrastex::Image;
using contrastex::LabelMap;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Between-class variance sum_c w_c (mu_c - mu)^2 for classes split at the
// given boundary bins (bins [b_{c-1}, b_c) form class c). Returns -1 when a
// class is empty.
inline double between_class_variance(const std::array<std::uint64_t, 256>& h, const std::vector<int>& bounds) {
  double total = 0.0, total_sum = 0.0;
  for (int b = 0; b < 256; ++b) {
    total += static_cast<double>(h[b]);
    total_sum += static_cast<double>(h[b]) * b;
  }
  const double mu = total_sum / total;
  std::vector<int> edges{0};
  edges.insert(edges.end(), bounds.begin(), bounds.end());
  edges.push_back(256);
  double var = 0.0;
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
    double n = 0.0, s = 0.0;
    for (int b = edges[c]; b < edges[c + 1]; ++b) {
      n += static_cast<double>(h[b]);
      s += static_cast<double>(h[b]) * b;
    }
    if (n == 0.0) return -1.0;
    const double m = s / n;
    var += (n / total) * (m - mu) * (m - mu);
  }
  return var;
}

// Every boundary tuple for 2 or 3 classes; the lexicographically first of
// those scoring within a relative 1e-12 of the best.
inline std::vector<int> exhaustive_otsu(const std::array<std::uint64_t, 256>& h, int classes) {
  std::vector<std::pair<std::vector<int>, double>> all;
  if (classes == 2) {
    for (int a = 1; a < 256; ++a) all.push_back({{a}, between_class_variance(h, {a})});
  } else {
    for (int a = 1; a < 256; ++a)
      for (int b = a + 1; b < 256; ++b) all.push_back({{a, b}, between_class_variance(h, {a, b})});
  }
  double best = -1.0;
  for (const auto& [_, v] : all) best = std::max(best, v);
  if (best < 0.0) return {};
  for (const auto& [t, v] : all) {
    if (v >= 0.0 && v >= best - 1e-12 * std::max(1.0, best)) return t;
  }
  return {};
}

// Flood fill from every unlabelled pixel in raster order.
inline LabelMap flood_fill(const BinaryMask& mask, bool eight) {
  LabelMap out(mask.width(), mask.height(), 0);
  int next = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y) || out(x, y) != 0) continue;
      ++next;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      out(x, y) = next;
      while (!q.empty()) {
        const auto [cx, cy] = q.front();
        q.pop();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (!mask.contains(nx, ny) || !mask.test(nx, ny) || out(nx, ny) != 0) continue;
            out(nx, ny) = next;
            q.push({nx, ny});
          }
        }
      }
    }
  }
  return out;
}

inline BinaryMask erode_scan(const BinaryMask& mask, int r) {
  BinaryMask out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy)
        for (int dx = -r; dx <= r && all; ++dx)
          all = mask.contains(x + dx, y + dy) && mask.test(x + dx, y + dy);
      out(x, y) = all ? 1 : 0;
    }
  }
  return out;
}

// Logistic model over segments 1..n; bit i of `kept` set means segment i+1
// keeps its content from x.
struct PlantedLogit {
  double intercept = 0.0;
  std::vector<double> w;

  double z_kept(std::uint32_t kept) const {
    double z = intercept;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (kept >> i & 1u) z += w[i];
    return z;
  }
  double p_replaced(std::uint32_t replaced) const {
    const std::uint32_t all = (1u << w.size()) - 1u;
    return sigmoid(z_kept(all & ~replaced));
  }
};

// Minimal class-flipping sets by brute force over every replaced set of at most max_size
// segments: the class flips, restoring any one replaced segment undoes the
// flip, and no strictly smaller such set is contained in it. Sets are
// returned as sorted 1-based id lists in (size, lexicographic) order.
inline std::vector<std::vector<int>> minimal_flip_sets(const PlantedLogit& m, std::size_t max_size,
                                                       double boundary = 0.5) {
  const std::size_t n = m.w.size();
  const bool original = m.p_replaced(0) >= boundary;
  auto flipped = [&](std::uint32_t r) { return (m.p_replaced(r) >= boundary) != original; };
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t r = 1; r < (1u << n); ++r) {
    if (static_cast<std::size_t>(std::popcount(r)) > max_size || !flipped(r)) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < n && minimal; ++i)
      if ((r >> i & 1u) && flipped(r & ~(1u << i))) minimal = false;
    if (minimal) candidates.push_back(r);
  }
  std::vector<std::vector<int>> out;
  for (std::uint32_t r : candidates) {
    bool superset = false;
    for (std::uint32_t s : candidates)
      if (s != r && (s & r) == s) superset = true;
    if (superset) continue;
    std::vector<int> ids;
    for (std::size_t i = 0; i < n; ++i)
      if (r >> i & 1u) ids.push_back(static_cast<int>(i) + 1);
    out.push_back(ids);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

struct Roles {
  std::set<int> sufficient, necessary_insufficient;
};

// Truth table over the selected segments (ids in `ids`, weights in `w`):
// sufficient when present alone clears L; necessary when some assignment
// clears L and every such assignment includes it.
inline Roles truth_table_roles(double w0, const std::vector<int>& ids, const std::vector<double>& w, double L) {
  Roles roles;
  const std::size_t n = ids.size();
  std::vector<bool> in_all(n, true);
  bool any = false;
  for (std::uint32_t a = 0; a < (1u << n); ++a) {
    double z = w0;
    for (std::size_t i = 0; i < n; ++i)
      if (a >> i & 1u) z += w[i];
    if (z <= L) continue;
    any = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!(a >> i & 1u)) in_all[i] = false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool sufficient = w0 + w[i] > L;
    if (sufficient) roles.sufficient.insert(ids[i]);
    if (any && in_all[i] && !sufficient) roles.necessary_insufficient.insert(ids[i]);
  }
  return roles;
}

// Two labelings describe the same partition (ignoring label values).
inline bool same_partition(const LabelMap& a, const LabelMap& b) {
  if (!a.same_shape(b)) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == 0) != (b[i] == 0)) return false;
    if (a[i] == 0) continue;
    auto [it, fresh] = ab.emplace(a[i], b[i]);
    if (!fresh && it->second != b[i]) return false;
    auto [jt, fresh2] = ba.emplace(b[i], a[i]);
    if (!fresh2 && jt->second != a[i]) return false;
  }
  return true;
}

inline BinaryMask random_mask(int w, int h, double density, contrastex::Rng& rng) {
  BinaryMask m(w, h, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.coin(density) ? 1 : 0;
  return m;
}

inline BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m(x, y) = 1;
  return m;
}

}  // namespace oracle
