#include "contrastex/imaging/felzenszwalb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "contrastex/imaging/morphology.hpp"

namespace contrastex {

Image gaussian_smooth(const Image& image, double sigma) {
  if (sigma <= 0.0 || image.empty()) return image;
  const int radius = static_cast<int>(std::ceil(sigma * 4.0));
  std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
  for (int i = 0; i <= radius; ++i) kernel[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  double total = kernel[0];
  for (int i = 1; i <= radius; ++i) total += 2.0 * kernel[static_cast<std::size_t>(i)];
  for (auto& k : kernel) k /= total;

  const int w = image.width();
  const int h = image.height();
  std::vector<double> tmp(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * image(x, y);
      for (int i = 1; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i)] * (image(std::max(x - i, 0), y) + image(std::min(x + i, w - 1), y));
      }
      tmp[image.index(x, y)] = acc;
    }
  }
  std::vector<double> out(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * tmp[image.index(x, y)];
      for (int i = 1; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i)] *
               (tmp[image.index(x, std::max(y - i, 0))] + tmp[image.index(x, std::min(y + i, h - 1))]);
      }
      out[image.index(x, y)] = acc;
    }
  }
  return Image::clamped(w, h, std::move(out));
}

namespace {

struct Edge {
  double weight;
  std::size_t a;
  std::size_t b;
};

class Forest {
 public:
  explicit Forest(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  std::size_t join(std::size_t a, std::size_t b) {
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t size(std::size_t root) const { return size_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

LabelMap felzenszwalb(const Image& image, const FelzenszwalbParams& params, const std::optional<BinaryMask>& roi) {
  if (!(params.scale > 0.0)) fail(ErrorKind::InvalidArgument, "Felzenszwalb scale must be > 0");
  if (params.sigma < 0.0) fail(ErrorKind::InvalidArgument, "Felzenszwalb sigma must be >= 0");
  if (params.min_size < 1) fail(ErrorKind::InvalidArgument, "Felzenszwalb min_size must be >= 1");
  if (roi) require_same_shape(image, *roi, "Felzenszwalb roi must match the image");

  const int w = image.width();
  const int h = image.height();
  const Image smooth = gaussian_smooth(image, params.sigma);
  auto inside = [&](int x, int y) { return !roi || roi->test(x, y); };

  std::vector<Edge> edges;
  edges.reserve(image.size() * 4);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!inside(x, y)) continue;
      const auto a = image.index(x, y);
      auto link = [&](int nx, int ny) {
        if (!smooth.contains(nx, ny) || !inside(nx, ny)) return;
        const auto b = image.index(nx, ny);
        edges.push_back({std::abs(smooth[a] - smooth[b]), std::min(a, b), std::max(a, b)});
      };
      link(x + 1, y);
      link(x, y + 1);
      link(x + 1, y + 1);
      link(x + 1, y - 1);
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    if (l.weight != r.weight) return l.weight < r.weight;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  Forest forest(image.size());
  std::vector<double> threshold(image.size(), params.scale);
  for (const auto& e : edges) {
    const auto ra = forest.find(e.a);
    const auto rb = forest.find(e.b);
    if (ra == rb) continue;
    if (e.weight <= threshold[ra] && e.weight <= threshold[rb]) {
      const auto root = forest.join(ra, rb);
      threshold[root] = e.weight + params.scale / static_cast<double>(forest.size(root));
    }
  }
  const auto min_size = static_cast<std::size_t>(params.min_size);
  for (const auto& e : edges) {
    const auto ra = forest.find(e.a);
    const auto rb = forest.find(e.b);
    if (ra != rb && (forest.size(ra) < min_size || forest.size(rb) < min_size)) forest.join(ra, rb);
  }

  LabelMap labels(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!inside(x, y)) continue;
      const auto i = image.index(x, y);
      const auto root = forest.find(i);
      if (forest.size(root) >= min_size) labels[i] = static_cast<int>(root) + 1;
    }
  }
  return relabel_raster(labels);
}

}  // namespace contrastex
