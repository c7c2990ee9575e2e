#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "contrastex/util/error.hpp"

namespace contrastex {

// Row-major 2-D grid shared by images, masks, label maps and saliency maps.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(checked(width)), height_(checked(height)), data_(area(), fill) {}
  Grid(int width, int height, std::vector<T> values)
      : width_(checked(width)), height_(checked(height)), data_(std::move(values)) {
    if (data_.size() != area()) fail(ErrorKind::DimensionMismatch, "value count does not match width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static int checked(int v) {
    if (v < 0) fail(ErrorKind::InvalidArgument, "negative grid dimension");
    return v;
  }
  std::size_t area() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Grayscale intensities in [0, 1]. Constructors validate the range; code that
// writes pixels directly is responsible for staying inside it.
class Image : public Grid<double> {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> pixels);

  // Clamps out-of-range values instead of rejecting them.
  static Image clamped(int width, int height, std::vector<double> pixels);

  bool in_range() const noexcept;
};

class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;

  bool test(int x, int y) const { return (*this)(x, y) != 0; }
  std::size_t count() const noexcept;
  bool any() const noexcept { return count() > 0; }
};

// 0 is background / unassigned.
class LabelMap : public Grid<int> {
 public:
  using Grid::Grid;

  int max_label() const noexcept;
  std::vector<std::size_t> label_sizes() const;  // index = label
  BinaryMask mask_of(int label) const;
};

// Signed per-pixel scores painted from segment scores.
class SaliencyMap : public Grid<double> {
 public:
  using Grid::Grid;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorKind::DimensionMismatch, what);
}

}  // namespace contrastex
