#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

inline constexpr int kPointingGrid = 7;

// How a visited square is scored.
//   PerSquare: one hit when the square contains any target, one miss otherwise.
//   PerTarget: every target adds a hit when the square contains it and a miss
//              when it does not, so one visit can add both.
// Both stop as soon as every target has been hit.
enum class PointingMode { PerSquare, PerTarget };

// Which part of a signed map counts as evidence.
enum class Polarity { Positive, Absolute };

struct PointingGameOptions {
  PointingMode mode = PointingMode::PerSquare;
  Polarity polarity = Polarity::Positive;
};

struct PointingGameResult {
  int hits = 0;
  int misses = 0;
  double score = 0.0;
  std::vector<int> visited;  // square indices r*7 + c, in visiting order
};

// Pixel span [begin, end) of grid cell `index` along a dimension of `extent`.
std::pair<int, int> grid_span(int extent, int index, int cells = kPointingGrid);

// Average (polarity-adjusted) saliency per square, raster order.
std::vector<double> square_scores(const SaliencyMap& saliency, Polarity polarity = Polarity::Positive);

// Squares containing at least one pixel of the target.
std::vector<bool> target_squares(const BinaryMask& target);

PointingGameResult pointing_game(const SaliencyMap& saliency, std::span<const BinaryMask> targets,
                                 const PointingGameOptions& options = {});

// Same game on precomputed square scores (49 values) and target squares.
PointingGameResult pointing_game_on_scores(std::span<const double> scores,
                                           const std::vector<std::vector<bool>>& target_squares,
                                           PointingMode mode = PointingMode::PerSquare);

// Salient pixels are those above threshold_pct% of the maximum.
double iou(const SaliencyMap& saliency, std::span<const BinaryMask> targets, double threshold_pct = 70.0,
           Polarity polarity = Polarity::Positive);

std::map<int, double> threshold_sweep(const SaliencyMap& saliency, std::span<const BinaryMask> targets,
                                      std::span<const int> percents, Polarity polarity = Polarity::Positive);

std::vector<int> default_sweep_percents();

struct Aggregate {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 s / sqrt(n)
  std::size_t n = 0;

  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

Aggregate aggregate(std::span<const double> scores);

bool intervals_overlap(const Aggregate& a, const Aggregate& b);

// Uniform per-pixel noise, the chance-level reference map.
SaliencyMap random_saliency(int width, int height, std::uint64_t seed);

struct BarSeries {
  std::string label;
  Aggregate value;
};

// Bar chart with confidence-interval whiskers, values on [0, 1].
std::string bar_chart_svg(const std::string& title, std::span<const BarSeries> bars);

}  // namespace contrastex
