#include "contrastex/synthetic/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "contrastex/imaging/image_io.hpp"
#include "contrastex/imaging/rle.hpp"
#include "contrastex/util/random.hpp"

namespace contrastex::synthetic {

namespace {

struct Box {
  double x0, y0, x1, y1;
};

struct Layer {
  Box box;
  std::function<bool(double, double)> inside;
  double intensity;
};

// Normalised radius of p in the ellipse frame (1 on the boundary).
double ellipse_radius(const Ellipse& e, double a, double b, double px, double py) {
  const double dx = px - e.center.x;
  const double dy = py - e.center.y;
  const double c = std::cos(e.rotation);
  const double s = std::sin(e.rotation);
  const double u = (c * dx + s * dy) / a;
  const double v = (-s * dx + c * dy) / b;
  return u * u + v * v;
}

// Region between the ellipse outline and the outline shrunk by `line`.
bool in_ellipse_band(const Ellipse& e, double line, double px, double py) {
  return ellipse_radius(e, e.semi_major, e.semi_minor, px, py) <= 1.0 &&
         ellipse_radius(e, e.semi_major - line, e.semi_minor - line, px, py) > 1.0;
}

Box ellipse_box(const Ellipse& e) {
  const double r = e.semi_major;
  return {e.center.x - r, e.center.y - r, e.center.x + r, e.center.y + r};
}

double cross(Point a, Point b, Point p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); }

bool in_triangle(const Triangle& t, double px, double py) {
  const Point p{px, py};
  const double d1 = cross(t.vertices[0], t.vertices[1], p);
  const double d2 = cross(t.vertices[1], t.vertices[2], p);
  const double d3 = cross(t.vertices[2], t.vertices[0], p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

Box triangle_box(const Triangle& t) {
  Box b{t.vertices[0].x, t.vertices[0].y, t.vertices[0].x, t.vertices[0].y};
  for (const auto& v : t.vertices) {
    b.x0 = std::min(b.x0, v.x);
    b.y0 = std::min(b.y0, v.y);
    b.x1 = std::max(b.x1, v.x);
    b.y1 = std::max(b.y1, v.y);
  }
  return b;
}

bool in_square(const Square& s, double px, double py) {
  const double h = s.side / 2.0;
  return std::abs(px - s.center.x) <= h && std::abs(py - s.center.y) <= h;
}

Box square_box(const Square& s) {
  const double h = s.side / 2.0;
  return {s.center.x - h, s.center.y - h, s.center.x + h, s.center.y + h};
}

double line_of(LineWeight w, const RenderStyle& style) {
  return w == LineWeight::Thin ? style.thin_line : style.thick_line;
}

// Fraction of each pixel's supersamples inside the layer, restricted to its
// bounding box.
std::vector<double> coverage(const Layer& layer, int width, int height, int ss) {
  std::vector<double> cov(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  const int x0 = std::max(0, static_cast<int>(std::floor(layer.box.x0)) - 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(layer.box.y0)) - 1);
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(layer.box.x1)) + 1);
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(layer.box.y1)) + 1);
  const double inv = 1.0 / (ss * ss);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int hits = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          if (layer.inside(x + (sx + 0.5) / ss, y + (sy + 0.5) / ss)) ++hits;
        }
      }
      cov[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = hits * inv;
    }
  }
  return cov;
}

std::vector<Layer> layers_of(const SceneSpec& spec, const RenderStyle& style) {
  std::vector<Layer> layers;
  const auto& cc = spec.concentric_circles;
  for (double r : cc.radii) {
    const double half = style.circle_line / 2.0;
    layers.push_back({{cc.center.x - r - half, cc.center.y - r - half, cc.center.x + r + half, cc.center.y + r + half},
                      [c = cc.center, r, half](double px, double py) {
                        const double d = std::hypot(px - c.x, py - c.y);
                        return d >= r - half && d <= r + half;
                      },
                      style.distractor_intensity});
  }
  layers.push_back({ellipse_box(spec.large_ellipse),
                    [e = spec.large_ellipse, line = style.large_ellipse_line](double px, double py) {
                      return in_ellipse_band(e, line, px, py);
                    },
                    style.distractor_intensity});
  layers.push_back({ellipse_box(spec.small_ellipse.shape),
                    [e = spec.small_ellipse.shape, line = line_of(spec.small_ellipse.line, style)](double px, double py) {
                      return in_ellipse_band(e, line, px, py);
                    },
                    style.evidence_intensity});
  if (spec.square) {
    layers.push_back({square_box(*spec.square), [s = *spec.square](double px, double py) { return in_square(s, px, py); },
                      style.evidence_intensity});
  }
  if (spec.triangle) {
    layers.push_back({triangle_box(*spec.triangle),
                      [t = *spec.triangle](double px, double py) { return in_triangle(t, px, py); },
                      style.evidence_intensity});
  }
  return layers;
}

BinaryMask coverage_mask(const Layer& layer, int width, int height, int ss) {
  const auto cov = coverage(layer, width, height, ss);
  BinaryMask mask(width, height);
  for (std::size_t i = 0; i < cov.size(); ++i) mask[i] = cov[i] >= 0.5 ? 1 : 0;
  return mask;
}

bool box_inside(const Box& b, int width, int height) {
  return b.x0 >= 0.0 && b.y0 >= 0.0 && b.x1 <= width && b.y1 <= height;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string to_string(Label label) { return label == Label::Diseased ? "diseased" : "healthy"; }

Label ground_truth_label(const SceneSpec& spec) {
  const bool square = spec.square.has_value();
  const bool thin = spec.small_ellipse.line == LineWeight::Thin;
  const bool triangle = spec.triangle.has_value();
  return (square && thin) || (square && triangle) ? Label::Diseased : Label::Healthy;
}

SceneSpec healthy_counterpart(const SceneSpec& spec) {
  SceneSpec healthy = spec;
  healthy.square.reset();
  healthy.triangle.reset();
  healthy.small_ellipse.line = LineWeight::Thick;
  return healthy;
}

void validate(const SceneSpec& spec, int width, int height, const RenderStyle& style) {
  if (width <= 0 || height <= 0) fail(ErrorKind::InvalidSpec, "image size must be positive");
  const auto check_ellipse = [&](const Ellipse& e, double line, const char* name) {
    if (!(e.semi_major > 0.0 && e.semi_minor > 0.0)) fail(ErrorKind::InvalidSpec, std::string(name) + " axes must be > 0");
    if (e.semi_minor <= line) fail(ErrorKind::InvalidSpec, std::string(name) + " is thinner than its line");
    if (!box_inside(ellipse_box(e), width, height)) fail(ErrorKind::InvalidSpec, std::string(name) + " leaves the image");
  };
  check_ellipse(spec.large_ellipse, style.large_ellipse_line, "large ellipse");
  check_ellipse(spec.small_ellipse.shape, style.thick_line, "small ellipse");

  const auto& cc = spec.concentric_circles;
  for (double r : cc.radii) {
    if (r <= 0.0) fail(ErrorKind::InvalidSpec, "circle radius must be > 0");
    const double reach = r + style.circle_line / 2.0;
    if (!box_inside({cc.center.x - reach, cc.center.y - reach, cc.center.x + reach, cc.center.y + reach}, width, height)) {
      fail(ErrorKind::InvalidSpec, "concentric circles leave the image");
    }
  }
  if (spec.square) {
    const auto& s = *spec.square;
    if (s.side <= 0.0) fail(ErrorKind::InvalidSpec, "square side must be > 0");
    const auto& e = spec.large_ellipse;
    const double a = e.semi_major - style.large_ellipse_line;
    const double b = e.semi_minor - style.large_ellipse_line;
    const double h = s.side / 2.0;
    for (double dx : {-h, h}) {
      for (double dy : {-h, h}) {
        if (ellipse_radius(e, a, b, s.center.x + dx, s.center.y + dy) >= 1.0) {
          fail(ErrorKind::InvalidSpec, "square is not inside the large ellipse");
        }
      }
    }
  }
  if (spec.triangle && !box_inside(triangle_box(*spec.triangle), width, height)) {
    fail(ErrorKind::InvalidSpec, "triangle leaves the image");
  }
}

Image render(const SceneSpec& spec, int width, int height, const RenderStyle& style) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> pixels(n, 0.0);
  for (const auto& layer : layers_of(spec, style)) {
    const auto cov = coverage(layer, width, height, style.supersampling);
    for (std::size_t i = 0; i < n; ++i) {
      if (cov[i] > 0.0) pixels[i] = pixels[i] * (1.0 - cov[i]) + cov[i] * layer.intensity;
    }
  }
  Rng noise(spec.rng_seed);
  for (auto& v : pixels) v += noise.normal(0.0, style.noise_sigma);
  return Image::clamped(width, height, std::move(pixels));
}

ScenePair generate_pair(const SceneSpec& spec, int width, int height, const RenderStyle& style) {
  validate(spec, width, height, style);
  ScenePair pair;
  pair.spec = spec;
  pair.x = render(spec, width, height, style);
  pair.x_prime = render(healthy_counterpart(spec), width, height, style);
  pair.truth.label = ground_truth_label(spec);
  if (pair.truth.label == Label::Healthy) return pair;

  const int ss = style.supersampling;
  if (spec.square) {
    const Square s = *spec.square;
    pair.truth.targets.push_back(
        {"square", coverage_mask({square_box(s), [s](double px, double py) { return in_square(s, px, py); }, 1.0}, width,
                                 height, ss)});
  }
  if (spec.triangle) {
    const Triangle t = *spec.triangle;
    pair.truth.targets.push_back(
        {"triangle", coverage_mask({triangle_box(t), [t](double px, double py) { return in_triangle(t, px, py); }, 1.0},
                                   width, height, ss)});
  }
  if (spec.small_ellipse.line == LineWeight::Thin) {
    const Ellipse e = spec.small_ellipse.shape;
    const double thin = style.thin_line;
    const double thick = style.thick_line;
    const Layer band{ellipse_box(e),
                     [e, thin, thick](double px, double py) {
                       return ellipse_radius(e, e.semi_major - thin, e.semi_minor - thin, px, py) <= 1.0 &&
                              ellipse_radius(e, e.semi_major - thick, e.semi_minor - thick, px, py) > 1.0;
                     },
                     1.0};
    pair.truth.targets.push_back({"small_ellipse", coverage_mask(band, width, height, ss)});
  }
  return pair;
}

nlohmann::json to_json(const LayoutRanges& r) {
  return {{"large_ellipse_major", {r.large_ellipse_major_min, r.large_ellipse_major_max}},
          {"large_ellipse_minor", {r.large_ellipse_minor_min, r.large_ellipse_minor_max}},
          {"square_side", {r.square_side_min, r.square_side_max}},
          {"small_ellipse_major", {r.small_ellipse_major_min, r.small_ellipse_major_max}},
          {"small_ellipse_minor", {r.small_ellipse_minor_min, r.small_ellipse_minor_max}},
          {"triangle_radius", {r.triangle_radius_min, r.triangle_radius_max}},
          {"circle_inner_radius", {r.circle_inner_radius_min, r.circle_inner_radius_max}},
          {"center_jitter", r.center_jitter},
          {"canvas_units", 128}};
}

SceneSpec random_spec(std::uint64_t seed, bool square, bool triangle, bool thin_ellipse, const DatasetOptions& options) {
  Rng rng(seed);
  const auto& r = options.ranges;
  const double sx = options.width / 128.0;
  const double sy = options.height / 128.0;
  const double s = std::min(sx, sy);
  auto jitter = [&] { return rng.uniform(-r.center_jitter, r.center_jitter); };
  auto at = [&](double cx, double cy) { return Point{(cx + jitter()) * sx, (cy + jitter()) * sy}; };

  SceneSpec spec;
  spec.large_ellipse.center = at(32, 34);
  spec.large_ellipse.semi_major = rng.uniform(r.large_ellipse_major_min, r.large_ellipse_major_max) * s;
  spec.large_ellipse.semi_minor = rng.uniform(r.large_ellipse_minor_min, r.large_ellipse_minor_max) * s;
  spec.large_ellipse.rotation = rng.uniform(-0.25, 0.25);

  spec.concentric_circles.center = at(96, 32);
  const double inner = rng.uniform(r.circle_inner_radius_min, r.circle_inner_radius_max) * s;
  spec.concentric_circles.radii = {inner, inner + 6.0 * s, inner + 12.0 * s};

  spec.small_ellipse.shape.center = at(32, 96);
  spec.small_ellipse.shape.semi_major = rng.uniform(r.small_ellipse_major_min, r.small_ellipse_major_max) * s;
  spec.small_ellipse.shape.semi_minor = rng.uniform(r.small_ellipse_minor_min, r.small_ellipse_minor_max) * s;
  spec.small_ellipse.shape.rotation = rng.uniform(0.0, std::numbers::pi);
  spec.small_ellipse.line = thin_ellipse ? LineWeight::Thin : LineWeight::Thick;

  // Always drawn so that the remaining draws do not depend on the flags.
  const double side = rng.uniform(r.square_side_min, r.square_side_max) * s;
  const Point square_offset{rng.uniform(-4.0, 4.0) * s, rng.uniform(-4.0, 4.0) * s};
  const Point tri_center = at(96, 96);
  const double tri_radius = rng.uniform(r.triangle_radius_min, r.triangle_radius_max) * s;
  const double tri_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  spec.rng_seed = rng.next();

  if (square) {
    spec.square = Square{{spec.large_ellipse.center.x + square_offset.x, spec.large_ellipse.center.y + square_offset.y}, side};
  }
  if (triangle) {
    Triangle t;
    for (int k = 0; k < 3; ++k) {
      const double a = tri_angle + k * 2.0 * std::numbers::pi / 3.0;
      t.vertices[static_cast<std::size_t>(k)] = {tri_center.x + tri_radius * std::cos(a), tri_center.y + tri_radius * std::sin(a)};
    }
    spec.triangle = t;
  }
  return spec;
}

std::vector<ScenePair> random_dataset(std::size_t n, std::uint64_t seed, const DatasetOptions& options) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "dataset size must be >= 1");
  if (!(options.disease_ratio >= 0.0 && options.disease_ratio <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "disease_ratio must be in [0,1]");
  }
  const auto diseased = static_cast<std::size_t>(std::llround(static_cast<double>(n) * options.disease_ratio));
  std::vector<bool> labels(n, false);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(diseased), true);
  Rng order(splitmix64(seed));
  order.shuffle(labels.begin(), labels.end());

  // (square, triangle, thin ellipse)
  static constexpr std::array<std::array<bool, 3>, 3> kDiseased{{{true, false, true}, {true, true, false}, {true, true, true}}};
  static constexpr std::array<std::array<bool, 3>, 5> kHealthy{
      {{false, false, false}, {false, false, true}, {false, true, false}, {false, true, true}, {true, false, false}}};

  const double s = std::min(options.width, options.height) / 128.0;
  RenderStyle style = options.style;
  style.circle_line *= s;
  style.large_ellipse_line *= s;
  style.thin_line *= s;
  style.thick_line *= s;

  std::vector<ScenePair> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t item_seed = splitmix64(seed ^ splitmix64(i + 1));
    Rng pick(item_seed);
    const auto& combo = labels[i] ? kDiseased[pick.below(kDiseased.size())] : kHealthy[pick.below(kHealthy.size())];
    const auto spec = random_spec(pick.next(), combo[0], combo[1], combo[2], options);
    items.push_back(generate_pair(spec, options.width, options.height, style));
  }
  return items;
}

namespace {

nlohmann::json point_json(Point p) { return {p.x, p.y}; }
Point point_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

nlohmann::json ellipse_json(const Ellipse& e) {
  return {{"center", point_json(e.center)}, {"semi_major", e.semi_major}, {"semi_minor", e.semi_minor}, {"rotation", e.rotation}};
}

Ellipse ellipse_from(const nlohmann::json& j) {
  return {point_from(j.at("center")), j.at("semi_major").get<double>(), j.at("semi_minor").get<double>(),
          j.at("rotation").get<double>()};
}

}  // namespace

nlohmann::json spec_to_json(const SceneSpec& spec) {
  nlohmann::json j;
  j["concentric_circles"] = {{"center", point_json(spec.concentric_circles.center)}, {"radii", spec.concentric_circles.radii}};
  j["large_ellipse"] = ellipse_json(spec.large_ellipse);
  j["small_ellipse"] = ellipse_json(spec.small_ellipse.shape);
  j["small_ellipse"]["line"] = spec.small_ellipse.line == LineWeight::Thin ? "thin" : "thick";
  j["square"] = spec.square ? nlohmann::json{{"center", point_json(spec.square->center)}, {"side", spec.square->side}}
                            : nlohmann::json(nullptr);
  if (spec.triangle) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : spec.triangle->vertices) verts.push_back(point_json(v));
    j["triangle"] = {{"vertices", verts}};
  } else {
    j["triangle"] = nullptr;
  }
  j["rng_seed"] = spec.rng_seed;
  return j;
}

SceneSpec spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.concentric_circles.center = point_from(j.at("concentric_circles").at("center"));
  spec.concentric_circles.radii = j.at("concentric_circles").at("radii").get<std::vector<double>>();
  spec.large_ellipse = ellipse_from(j.at("large_ellipse"));
  spec.small_ellipse.shape = ellipse_from(j.at("small_ellipse"));
  spec.small_ellipse.line = j.at("small_ellipse").at("line").get<std::string>() == "thin" ? LineWeight::Thin : LineWeight::Thick;
  if (!j.at("square").is_null()) {
    spec.square = Square{point_from(j["square"].at("center")), j["square"].at("side").get<double>()};
  }
  if (!j.at("triangle").is_null()) {
    Triangle t;
    const auto& verts = j["triangle"].at("vertices");
    for (std::size_t k = 0; k < 3; ++k) t.vertices[k] = point_from(verts.at(k));
    spec.triangle = t;
  }
  spec.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return spec;
}

nlohmann::json truth_to_json(const GroundTruth& truth) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : truth.targets) targets.push_back({{"name", t.name}, {"mask", mask_to_json(t.mask)}});
  return {{"label", to_string(truth.label)}, {"targets", targets}};
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth truth;
  truth.label = j.at("label").get<std::string>() == "diseased" ? Label::Diseased : Label::Healthy;
  for (const auto& t : j.at("targets")) truth.targets.push_back({t.at("name").get<std::string>(), mask_from_json(t.at("mask"))});
  return truth;
}

void export_dataset(const std::vector<ScenePair>& items, const std::filesystem::path& directory,
                    const DatasetOptions& options, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + directory.string() + ": " + ec.message());
  const nlohmann::json generator = {{"seed", seed},
                                    {"width", options.width},
                                    {"height", options.height},
                                    {"disease_ratio", options.disease_ratio},
                                    {"ranges", to_json(options.ranges)},
                                    {"noise_sigma", options.style.noise_sigma},
                                    {"count", items.size()}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::ostringstream id;
    id << std::setw(4) << std::setfill('0') << i;
    const auto& item = items[i];
    save_png(item.x, directory / (id.str() + "_x.png"));
    save_png(item.x_prime, directory / (id.str() + "_xp.png"));
    nlohmann::json doc = truth_to_json(item.truth);
    doc["id"] = id.str();
    doc["spec"] = spec_to_json(item.spec);
    doc["generator"] = generator;
    std::ofstream out(directory / (id.str() + "_truth.json"));
    if (!out) fail(ErrorKind::Io, "cannot write truth file in " + directory.string());
    out << doc.dump(2) << '\n';
  }
}

std::vector<DatasetItem> load_dataset(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) fail(ErrorKind::Io, "no such dataset directory: " + directory.string());
  std::vector<std::string> ids;
  const std::string suffix = "_truth.json";
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    const auto name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  std::vector<DatasetItem> items;
  for (const auto& id : ids) {
    std::ifstream in(directory / (id + suffix));
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Io, "malformed truth file for " + id + ": " + e.what());
    }
    items.push_back({id, load_image(directory / (id + "_x.png")), load_image(directory / (id + "_xp.png")),
                     truth_from_json(doc)});
  }
  return items;
}

}  // namespace contrastex::synthetic
