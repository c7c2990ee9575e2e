#include "contrastex/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "contrastex/util/random.hpp"

namespace contrastex {

namespace {

double adjust(double v, Polarity polarity) { return polarity == Polarity::Absolute ? std::abs(v) : std::max(v, 0.0); }

void require_targets(const SaliencyMap& saliency, std::span<const BinaryMask> targets) {
  if (targets.empty()) fail(ErrorKind::EmptyTargets, "no target regions");
  for (const auto& t : targets) {
    require_same_shape(saliency, t, "target mask must match the saliency map");
    if (!t.any()) fail(ErrorKind::EmptyTargets, "target region is empty");
  }
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::pair<int, int> grid_span(int extent, int index, int cells) {
  const auto begin = static_cast<long long>(index) * extent / cells;
  const auto end = static_cast<long long>(index + 1) * extent / cells;
  return {static_cast<int>(begin), static_cast<int>(end)};
}

std::vector<double> square_scores(const SaliencyMap& saliency, Polarity polarity) {
  std::vector<double> scores(kPointingGrid * kPointingGrid, 0.0);
  for (int r = 0; r < kPointingGrid; ++r) {
    const auto [y0, y1] = grid_span(saliency.height(), r);
    for (int c = 0; c < kPointingGrid; ++c) {
      const auto [x0, x1] = grid_span(saliency.width(), c);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) sum += adjust(saliency(x, y), polarity);
      }
      const auto area = static_cast<double>(y1 - y0) * static_cast<double>(x1 - x0);
      scores[static_cast<std::size_t>(r * kPointingGrid + c)] = area > 0 ? sum / area : 0.0;
    }
  }
  return scores;
}

std::vector<bool> target_squares(const BinaryMask& target) {
  std::vector<bool> in(kPointingGrid * kPointingGrid, false);
  for (int r = 0; r < kPointingGrid; ++r) {
    const auto [y0, y1] = grid_span(target.height(), r);
    for (int c = 0; c < kPointingGrid; ++c) {
      const auto [x0, x1] = grid_span(target.width(), c);
      bool found = false;
      for (int y = y0; y < y1 && !found; ++y) {
        for (int x = x0; x < x1 && !found; ++x) found = target.test(x, y);
      }
      in[static_cast<std::size_t>(r * kPointingGrid + c)] = found;
    }
  }
  return in;
}

PointingGameResult pointing_game_on_scores(std::span<const double> scores, const std::vector<std::vector<bool>>& squares,
                                           PointingMode mode) {
  if (squares.empty()) fail(ErrorKind::EmptyTargets, "no target regions");
  const std::size_t cells = scores.size();
  for (const auto& t : squares) {
    if (t.size() != cells) fail(ErrorKind::LengthMismatch, "target square list does not match the grid");
    if (std::none_of(t.begin(), t.end(), [](bool b) { return b; })) fail(ErrorKind::EmptyTargets, "target region is empty");
  }
  std::vector<int> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });

  PointingGameResult result;
  std::vector<bool> hit(squares.size(), false);
  std::size_t remaining = squares.size();
  for (int square : order) {
    if (remaining == 0) break;
    result.visited.push_back(square);
    const auto s = static_cast<std::size_t>(square);
    bool any = false;
    for (std::size_t t = 0; t < squares.size(); ++t) {
      if (squares[t][s]) {
        any = true;
        if (!hit[t]) {
          hit[t] = true;
          --remaining;
        }
        if (mode == PointingMode::PerTarget) ++result.hits;
      } else if (mode == PointingMode::PerTarget) {
        ++result.misses;
      }
    }
    if (mode == PointingMode::PerSquare) ++(any ? result.hits : result.misses);
  }
  result.score = static_cast<double>(result.hits) / static_cast<double>(result.hits + result.misses);
  return result;
}

PointingGameResult pointing_game(const SaliencyMap& saliency, std::span<const BinaryMask> targets,
                                 const PointingGameOptions& options) {
  require_targets(saliency, targets);
  std::vector<std::vector<bool>> squares;
  squares.reserve(targets.size());
  for (const auto& t : targets) squares.push_back(target_squares(t));
  return pointing_game_on_scores(square_scores(saliency, options.polarity), squares, options.mode);
}

double iou(const SaliencyMap& saliency, std::span<const BinaryMask> targets, double threshold_pct, Polarity polarity) {
  require_targets(saliency, targets);
  double peak = 0.0;
  for (double v : saliency.values()) peak = std::max(peak, adjust(v, polarity));
  if (!(peak > 0.0)) fail(ErrorKind::ZeroSaliency, "saliency map has no positive values");
  const double cut = threshold_pct / 100.0 * peak;
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const bool salient = adjust(saliency[i], polarity) > cut;
    const bool target = std::any_of(targets.begin(), targets.end(), [i](const BinaryMask& t) { return t[i] != 0; });
    inter += salient && target;
    uni += salient || target;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::map<int, double> threshold_sweep(const SaliencyMap& saliency, std::span<const BinaryMask> targets,
                                      std::span<const int> percents, Polarity polarity) {
  std::map<int, double> out;
  for (int p : percents) out[p] = iou(saliency, targets, p, polarity);
  return out;
}

std::vector<int> default_sweep_percents() { return {60, 70, 80, 90}; }

Aggregate aggregate(std::span<const double> scores) {
  if (scores.size() < 2) fail(ErrorKind::InsufficientData, "need at least two scores for a confidence interval");
  const auto n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n), scores.size()};
}

bool intervals_overlap(const Aggregate& a, const Aggregate& b) { return a.lower() <= b.upper() && b.lower() <= a.upper(); }

SaliencyMap random_saliency(int width, int height, std::uint64_t seed) {
  SaliencyMap map(width, height);
  Rng rng(seed);
  for (auto& v : map.values()) v = rng.uniform();
  return map;
}

std::string bar_chart_svg(const std::string& title, std::span<const BarSeries> bars) {
  constexpr int kWidth = 480;
  constexpr int kHeight = 320;
  constexpr int kLeft = 50;
  constexpr int kBottom = 40;
  constexpr int kTop = 40;
  const int plot_h = kHeight - kTop - kBottom;
  const int slot = bars.empty() ? 0 : (kWidth - kLeft - 20) / static_cast<int>(bars.size());
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << xml_escape(title) << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << v
        << "</text>\n";
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double x = kLeft + 10 + slot * static_cast<double>(i);
    const double bw = slot * 0.6;
    svg << "<rect x=\"" << x << "\" y=\"" << y_of(b.value.mean) << "\" width=\"" << bw << "\" height=\""
        << y_of(0.0) - y_of(b.value.mean) << "\" fill=\"#4a78b5\"/>\n";
    const double cx = x + bw / 2;
    svg << "<line x1=\"" << cx << "\" y1=\"" << y_of(b.value.upper()) << "\" x2=\"" << cx << "\" y2=\""
        << y_of(b.value.lower()) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << cx << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << xml_escape(b.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace contrastex
