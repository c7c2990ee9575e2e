#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

// 8-bit PNG (any colour type; colour converted to luminance) or binary PGM
// (P5). Intensities are divided by 255 (by maxval for PGM).
Image load_image(const std::filesystem::path& path);

// Rounds v*255.
void save_png(const Image& image, const std::filesystem::path& path);
void save_pgm(const Image& image, const std::filesystem::path& path);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

void save_png(const RgbImage& image, const std::filesystem::path& path);

// Heat overlay on the grayscale base: positive scores tint red, negative blue,
// opacity proportional to |score| / max |score|.
RgbImage saliency_overlay(const Image& base, const SaliencyMap& saliency);

// Distinct colour per label, black background.
RgbImage label_visualization(const LabelMap& labels);

nlohmann::json saliency_to_json(const SaliencyMap& saliency);
SaliencyMap saliency_from_json(const nlohmann::json& j);

// Third-party saliency maps: .json (raw values) or a grayscale image.
SaliencyMap load_saliency(const std::filesystem::path& path);

}  // namespace contrastex
