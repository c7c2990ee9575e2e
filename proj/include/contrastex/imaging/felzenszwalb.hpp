#pragma once

#include <optional>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

struct FelzenszwalbParams {
  double scale = 1.0;   // k: larger favours larger regions
  double sigma = 0.8;   // Gaussian pre-smoothing width, 0 disables
  int min_size = 20;    // regions smaller than this are merged or dropped
};

// Graph-based segmentation (Felzenszwalb & Huttenlocher, 2004) on an
// 8-connected pixel grid with |I(p) - I(q)| edge weights after smoothing.
// Only pixels inside `roi` take part; everything else is labelled 0.
// Edges are processed in (weight, first endpoint, second endpoint) order,
// which makes the output a deterministic function of the inputs. Regions
// still below min_size after the merge pass (isolated roi islands) are
// dropped to 0. Labels are renumbered 1..k in raster order.
LabelMap felzenszwalb(const Image& image, const FelzenszwalbParams& params,
                      const std::optional<BinaryMask>& roi = std::nullopt);

// Separable Gaussian blur with edge clamping; exposed for tests.
Image gaussian_smooth(const Image& image, double sigma);

}  // namespace contrastex
