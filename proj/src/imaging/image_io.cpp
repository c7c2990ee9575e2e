#include "contrastex/imaging/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace contrastex {

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

Image load_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0) {
    fail(ErrorKind::Io, "cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr) == 0) {
    const std::string message = img.message;
    png_image_free(&img);
    fail(ErrorKind::Io, "cannot decode PNG " + path.string() + ": " + message);
  }
  std::vector<double> pixels(buffer.size());
  std::transform(buffer.begin(), buffer.end(), pixels.begin(), [](std::uint8_t b) { return b / 255.0; });
  return Image(static_cast<int>(img.width), static_cast<int>(img.height), std::move(pixels));
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  if (!(in >> v)) fail(ErrorKind::Io, "malformed PGM header");
  return v;
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") fail(ErrorKind::Io, path.string() + " is not a binary PGM (P5)");
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) fail(ErrorKind::Io, "bad PGM dimensions in " + path.string());
  in.get();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<std::uint8_t> raw(n * bytes_per);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    fail(ErrorKind::Io, "truncated PGM " + path.string());
  }
  std::vector<double> pixels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes_per == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    pixels[i] = std::min(1.0, static_cast<double>(v) / maxval);
  }
  return Image(w, h, std::move(pixels));
}

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format, const std::uint8_t* data) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr) == 0) {
    fail(ErrorKind::Io, "cannot write PNG " + path.string() + ": " + img.message);
  }
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
  auto e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e == ext;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "no such file: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  char head[2] = {0, 0};
  probe.read(head, 2);
  if (head[0] == 'P' && head[1] == '5') return load_pgm(path);
  return load_png(path);
}

void save_png(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(image.size());
  std::transform(image.values().begin(), image.values().end(), bytes.begin(), to_byte);
  write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, bytes.data());
}

void save_pgm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (double v : image.values()) out.put(static_cast<char>(to_byte(v)));
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
  write_png(path, image.width, image.height, PNG_FORMAT_RGB, image.rgb.data());
}

RgbImage saliency_overlay(const Image& base, const SaliencyMap& saliency) {
  require_same_shape(base, saliency, "saliency overlay needs a base image of the same size");
  double peak = 0.0;
  for (double v : saliency.values()) peak = std::max(peak, std::abs(v));
  RgbImage out{base.width(), base.height(), std::vector<std::uint8_t>(base.size() * 3)};
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double gray = base[i];
    double r = gray, g = gray, b = gray;
    if (peak > 0.0 && saliency[i] != 0.0) {
      const double alpha = std::min(1.0, std::abs(saliency[i]) / peak) * 0.75;
      const bool positive = saliency[i] > 0.0;
      r = (1.0 - alpha) * gray + alpha * (positive ? 1.0 : 0.0);
      g = (1.0 - alpha) * gray;
      b = (1.0 - alpha) * gray + alpha * (positive ? 0.0 : 1.0);
    }
    out.rgb[3 * i] = to_byte(r);
    out.rgb[3 * i + 1] = to_byte(g);
    out.rgb[3 * i + 2] = to_byte(b);
  }
  return out;
}

RgbImage label_visualization(const LabelMap& labels) {
  RgbImage out{labels.width(), labels.height(), std::vector<std::uint8_t>(labels.size() * 3)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = static_cast<std::uint32_t>(labels[i]);
    if (l == 0) continue;
    // Golden-ratio hue walk keeps neighbouring ids visually distinct.
    const double hue = std::fmod(static_cast<double>(l) * 0.618033988749895, 1.0) * 6.0;
    const double f = hue - std::floor(hue);
    const double rgb[6][3] = {{1, f, 0}, {1 - f, 1, 0}, {0, 1, f}, {0, 1 - f, 1}, {f, 0, 1}, {1, 0, 1 - f}};
    const auto* c = rgb[static_cast<int>(hue) % 6];
    for (int k = 0; k < 3; ++k) out.rgb[3 * i + static_cast<std::size_t>(k)] = to_byte(0.25 + 0.75 * c[k]);
  }
  return out;
}

nlohmann::json saliency_to_json(const SaliencyMap& saliency) {
  return {{"width", saliency.width()},
          {"height", saliency.height()},
          {"values", std::vector<double>(saliency.values().begin(), saliency.values().end())}};
}

SaliencyMap saliency_from_json(const nlohmann::json& j) {
  return SaliencyMap(j.at("width").get<int>(), j.at("height").get<int>(), j.at("values").get<std::vector<double>>());
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
  if (has_extension(path, ".json")) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    try {
      return saliency_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Io, "malformed saliency JSON " + path.string() + ": " + e.what());
    }
  }
  const Image img = load_image(path);
  return SaliencyMap(img.width(), img.height(), std::vector<double>(img.values().begin(), img.values().end()));
}

}  // namespace contrastex
