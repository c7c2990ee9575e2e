#include "contrastex/imaging/image.hpp"

#include <algorithm>
#include <cmath>

namespace contrastex {

Image::Image(int width, int height, double fill) : Grid(width, height, fill) {
  if (!(fill >= 0.0 && fill <= 1.0)) fail(ErrorKind::InvalidArgument, "image fill outside [0,1]");
}

Image::Image(int width, int height, std::vector<double> pixels) : Grid(width, height, std::move(pixels)) {
  if (!in_range()) fail(ErrorKind::InvalidArgument, "image intensity outside [0,1]");
}

Image Image::clamped(int width, int height, std::vector<double> pixels) {
  for (auto& v : pixels) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return Image(width, height, std::move(pixels));
}

bool Image::in_range() const noexcept {
  return std::all_of(values().begin(), values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(values().begin(), values().end(), [](auto b) { return b != 0; }));
}

int LabelMap::max_label() const noexcept {
  int best = 0;
  for (int v : values()) best = std::max(best, v);
  return best;
}

std::vector<std::size_t> LabelMap::label_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(max_label()) + 1, 0);
  for (int v : values()) {
    if (v > 0) ++sizes[static_cast<std::size_t>(v)];
  }
  return sizes;
}

BinaryMask LabelMap::mask_of(int label) const {
  BinaryMask mask(width(), height());
  for (std::size_t i = 0; i < size(); ++i) mask[i] = (*this)[i] == label ? 1 : 0;
  return mask;
}

}  // namespace contrastex
