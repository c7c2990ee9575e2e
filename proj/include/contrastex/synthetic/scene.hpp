#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contrastex/imaging/image.hpp"

namespace contrastex::synthetic {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Ellipse {
  Point center;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double rotation = 0.0;  // radians
};

enum class LineWeight { Thin, Thick };

struct ConcentricCircles {
  Point center;
  std::vector<double> radii;
};

struct SmallEllipse {
  Ellipse shape;
  LineWeight line = LineWeight::Thick;
};

struct Square {
  Point center;
  double side = 0.0;
};

struct Triangle {
  std::array<Point, 3> vertices;
};

// One scene. Positions are in pixel units of the image it is rendered into.
struct SceneSpec {
  ConcentricCircles concentric_circles;
  Ellipse large_ellipse;
  SmallEllipse small_ellipse;
  std::optional<Square> square;
  std::optional<Triangle> triangle;
  std::uint64_t rng_seed = 0;  // drives the additive noise field
};

enum class Label { Healthy, Diseased };

std::string to_string(Label label);

struct Target {
  std::string name;  // "square", "triangle", "small_ellipse"
  BinaryMask mask;
};

struct GroundTruth {
  Label label = Label::Healthy;
  std::vector<Target> targets;
};

struct ScenePair {
  Image x;
  Image x_prime;
  GroundTruth truth;
  SceneSpec spec;
};

// Rendering constants. Background 0, shapes in [0.4, 1.0].
struct RenderStyle {
  double distractor_intensity = 0.6;  // circles and the large ellipse
  double evidence_intensity = 0.9;    // square, triangle and small ellipse
  double circle_line = 2.0;
  double large_ellipse_line = 2.5;
  double thin_line = 1.5;
  double thick_line = 5.0;
  double noise_sigma = 0.02;
  int supersampling = 4;  // per axis
};

// Diseased iff a square is present together with a thin small ellipse or a
// triangle.
Label ground_truth_label(const SceneSpec& spec);

// The healthy counterpart: square and triangle removed, small ellipse thick.
SceneSpec healthy_counterpart(const SceneSpec& spec);

// Throws InvalidSpec when the square leaves the large ellipse's interior or a
// shape leaves the image.
void validate(const SceneSpec& spec, int width, int height, const RenderStyle& style = {});

Image render(const SceneSpec& spec, int width, int height, const RenderStyle& style = {});

// x renders the spec, x' its healthy counterpart with the identical noise
// field. Targets are the disease-evidence regions present in x: the square,
// the triangle, and for a thin small ellipse the band the healthy redraw
// fills in. Targets are empty for healthy scenes.
ScenePair generate_pair(const SceneSpec& spec, int width, int height, const RenderStyle& style = {});

// Shape placement ranges, in units of a 128x128 canvas; scaled to the
// requested size.
struct LayoutRanges {
  double large_ellipse_major_min = 24, large_ellipse_major_max = 27;
  double large_ellipse_minor_min = 19, large_ellipse_minor_max = 22;
  double square_side_min = 11, square_side_max = 13;
  double small_ellipse_major_min = 15, small_ellipse_major_max = 17;
  double small_ellipse_minor_min = 9, small_ellipse_minor_max = 11;
  double triangle_radius_min = 11, triangle_radius_max = 13;
  double circle_inner_radius_min = 5, circle_inner_radius_max = 7;
  double center_jitter = 4;
};

nlohmann::json to_json(const LayoutRanges& ranges);

struct DatasetOptions {
  int width = 128;
  int height = 128;
  double disease_ratio = 0.5;
  LayoutRanges ranges;
  RenderStyle style;
};

// Draws a scene with the requested shape combination.
SceneSpec random_spec(std::uint64_t seed, bool square, bool triangle, bool thin_ellipse, const DatasetOptions& options);

// round(n * disease_ratio) diseased items, the rest healthy, in a seeded
// shuffled order. Deterministic for a fixed seed. Line widths in the style
// are for a 128x128 canvas and scale with the image like the layout does.
std::vector<ScenePair> random_dataset(std::size_t n, std::uint64_t seed, const DatasetOptions& options = {});

nlohmann::json spec_to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const nlohmann::json& j);

nlohmann::json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);

// <id>_x.png, <id>_xp.png and <id>_truth.json per item.
void export_dataset(const std::vector<ScenePair>& items, const std::filesystem::path& directory,
                    const DatasetOptions& options, std::uint64_t seed);

struct DatasetItem {
  std::string id;
  Image x;
  Image x_prime;
  GroundTruth truth;
};

// Reads back a directory written by export_dataset (sorted by id).
std::vector<DatasetItem> load_dataset(const std::filesystem::path& directory);

}  // namespace contrastex::synthetic
