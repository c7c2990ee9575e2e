#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "../helpers/oracles.hpp"
#include "contrastex/classifier/desk_classifier.hpp"
#include "contrastex/evaluation/metrics.hpp"
#include "contrastex/imaging/otsu.hpp"
#include "contrastex/report/artifacts.hpp"
#include "contrastex/report/config.hpp"
#include "contrastex/synthetic/scene.hpp"

using namespace contrastex;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

RegressionModel model_of(double w0, std::map<int, double> w) {
  RegressionModel m;
  m.intercept = w0;
  m.coefficients = std::move(w);
  return m;
}

// n stripes, each a planted region: bright in x, black in the contrast.
struct Stripes {
  Image x, x_prime;
  std::vector<BinaryMask> masks;
  explicit Stripes(int n) : x(10 * n, 10, 0.0), x_prime(10 * n, 10, 0.0) {
    for (int i = 0; i < n; ++i) {
      masks.push_back(oracle::rect_mask(10 * n, 10, 10 * i + 1, 1, 10 * i + 9, 9));
      for (std::size_t k = 0; k < x.size(); ++k)
        if (masks.back()[k]) x[k] = 0.8;
    }
  }
};

// Weights with |w| in [2, 6] and an intercept such that x is positive and no
// subset drives the logit past +-12, where probability clamping starts to bite.
oracle::PlantedLogit draw_planted(Rng& rng, int n) {
  for (;;) {
    oracle::PlantedLogit m;
    for (int i = 0; i < n; ++i) m.w.push_back((rng.coin(0.75) ? 1.0 : -1.0) * rng.uniform(2.0, 6.0));
    double lo = 0, hi = 0;
    for (double w : m.w) (w < 0 ? lo : hi) += w;
    m.intercept = rng.uniform(-10.0, 4.0);
    if (m.z_kept((1u << n) - 1) < 0.25) continue;
    if (m.intercept + lo < -12.0 || m.intercept + hi > 12.0) continue;
    return m;
  }
}

Outcome criterion_1() {
  Rng rng(101);
  const auto t0 = Clock::now();
  double worst_coef = 0.0, worst_fid = 0.0, worst_forced = 0.0;
  int failures = 0, omitted = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const int n = 3 + draw % 4;
    const auto truth = draw_planted(rng, n);
    Stripes s(n);
    PlantedRegionClassifier clf(s.masks, truth.w, truth.intercept, s.x_prime);
    ExplainParams p;
    p.segmentation.threshold_method = ThresholdMethod::Manual;
    p.segmentation.manual_high = 0.5;
    p.segmentation.manual_low = 0.1;
    p.segmentation.min_seg_size = 20;
    p.segmentation.seg_size_increment = 5;
    p.max_predictors = n;
    p.max_segments_in_counterfactual = static_cast<std::size_t>(n);
    const auto ex = explain(s.x, s.x_prime, clf, p);
    bool ok = ex.segments().count() == n;
    double err = std::abs(ex.regression.intercept - truth.intercept);
    for (int id = 1; id <= n; ++id) {
      const auto it = ex.regression.coefficients.find(id);
      err = std::max(err, it == ex.regression.coefficients.end() ? std::abs(truth.w[id - 1])
                                                                 : std::abs(it->second - truth.w[id - 1]));
    }
    worst_coef = std::max(worst_coef, err);
    ok = ok && err < 1e-6;
    if (ex.selected.size() < static_cast<std::size_t>(n)) ++omitted;

    // The same rows with every segment forced into the model.
    std::vector<RegressionRow> rows{{PerturbationVector(static_cast<std::size_t>(n)), ex.y_original, 1.0}};
    for (const auto& r : ex.records) rows.push_back({r.vector, r.probability, r.is_counterfactual ? p.counterfactual_weight : 1.0});
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 1);
    const auto forced = fit_weighted_logistic(rows, all, p.fit);
    double forced_err = std::abs(forced.intercept - truth.intercept);
    for (int id = 1; id <= n; ++id) forced_err = std::max(forced_err, std::abs(forced.coefficients.at(id) - truth.w[id - 1]));
    worst_forced = std::max(worst_forced, forced_err);
    for (double e : ex.fidelity) {
      worst_fid = std::max(worst_fid, e);
      ok = ok && e < 1e-6;
    }
    failures += ok ? 0 : 1;
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 60.0,
          fmt("planted recovery, 100 draws n=3..6: %d failed (%d with a planted segment left out by AIC selection), max "
              "coefficient error %.2e, max fidelity error %.2e, %.1f s; all segments forced in: max error %.2e",
              failures, omitted, worst_coef, worst_fid, elapsed, worst_forced)};
}

Outcome criterion_2() {
  Rng rng(202);
  int mismatches = 0;
  std::size_t total_sets = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 10;
    oracle::PlantedLogit truth;
    for (int i = 0; i < n; ++i) truth.w.push_back(rng.uniform(-2.0, 4.0));
    double sum = 0.0;
    for (double w : truth.w) sum += w;
    truth.intercept = rng.uniform(0.05, 4.0) - sum;

    LabelMap labels(4 * n, 3);
    Image x(4 * n, 3, 0.0), xp(4 * n, 3, 0.0);
    for (int y = 0; y < 3; ++y)
      for (int c = 0; c < 4 * n; ++c) {
        labels(c, y) = c / 4 + 1;
        x(c, y) = 0.6 + 0.3 * rng.uniform();
        xp(c, y) = 0.04 * rng.uniform();
      }
    const auto segments = make_segment_map(labels, Provenance::HighIntensity, 1);
    std::vector<BinaryMask> masks;
    for (int id = 1; id <= n; ++id) masks.push_back(segments.mask(id));
    PlantedRegionClassifier clf(masks, truth.w, truth.intercept, xp);

    const auto vectors = enumerate_perturbations(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    const auto records = evaluate_dataset(clf, x, xp, segments, vectors);
    const auto found = find_counterfactuals(records, clf.probability(x), 0.5);
    std::vector<std::vector<int>> sets;
    for (const auto& c : found) sets.push_back(c.replaced);
    const auto expected = oracle::minimal_flip_sets(truth, static_cast<std::size_t>(n));
    total_sets += expected.size();
    mismatches += sets == expected ? 0 : 1;
  }
  return {mismatches == 0,
          fmt("counterfactuals vs exhaustive minimal-flip search, 200 trials n<=10: %d mismatches (%zu sets)", mismatches,
              total_sets)};
}

Outcome criterion_3() {
  const auto m = model_of(-4.9, {{9, 11.7}, {11, 10.0}});
  const auto o = find_overdetermination(m, 0.99);
  std::vector<std::uint8_t> bits(11, 0);
  bits[8] = 1;
  const double p = m.predict(PerturbationVector(bits));
  const bool ok = o.sufficient == std::vector<int>{9, 11} && o.overdetermined && std::abs(p - oracle::sigmoid(6.8)) < 1e-9;
  return {ok, fmt("overdetermination {Seg09, Seg11}: found %zu sufficient, p(Seg09 alone)=%.10f, sigma(6.8)=%.10f",
                  o.sufficient.size(), p, oracle::sigmoid(6.8))};
}

Outcome criterion_4() {
  // SQ = 1, TR = 2, TE = 3.
  const double w0 = -4.9, sq = 7.0, tr = 4.0, te = 4.0;
  const double L = std::log(0.99 / 0.01);
  const auto roles = classify_causal_roles(model_of(w0, {{1, sq}, {2, tr}, {3, te}}), 0.99);
  const auto truth = oracle::truth_table_roles(w0, {1, 2, 3}, {sq, tr, te}, L);
  const bool inequalities = w0 + sq <= L && w0 + sq + tr > L && w0 + sq + te > L && w0 + tr + te <= L;
  const bool ok = inequalities && roles.necessary_insufficient == std::vector<int>{1} && roles.sufficient.empty() &&
                  truth.necessary_insufficient == std::set<int>{1} && truth.sufficient.empty();
  return {ok, fmt("SQ and (TR or TE): necessary-but-insufficient=%zu segment(s) [SQ], sufficient alone=%zu, "
                  "truth table agrees=%s",
                  roles.necessary_insufficient.size(), roles.sufficient.size(),
                  truth.necessary_insufficient == std::set<int>{1} ? "yes" : "no")};
}

Outcome criterion_5() {
  const double direct = fidelity_error(0.44, 0.43);
  const auto m = model_of(oracle::logit(0.44), {{1, 2.0}});
  const auto cf = PerturbationVector::replacing(1, std::vector<int>{1});
  const auto viaModel = fidelity_errors(m, std::vector<Counterfactual>{{{1}, cf, 0.43}});
  const bool ok = std::abs(direct - 0.01) < 1e-12 && std::abs(viaModel.at(0) - 0.01) < 1e-12;
  return {ok, fmt("fidelity error for reg=0.44, observed 0.43: %.15f", direct)};
}

Outcome criterion_6() {
  Rng rng(606);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    Histogram h{};
    const int populated = rng.integer(3, 80);
    for (int i = 0; i < populated; ++i) h[rng.below(256)] += 1 + rng.below(5000);
    for (int classes : {2, 3}) {
      bool same = false;
      try {
        same = multi_otsu_bins(h, classes) == oracle::exhaustive_otsu(h, classes);
      } catch (const Error&) {
        same = false;
      }
      mismatches += same ? 0 : 1;
    }
  }
  return {mismatches == 0, fmt("multi-Otsu vs exhaustive search, 500 histograms x {2,3} classes: %d mismatches", mismatches)};
}

struct EndToEnd {
  double validation_accuracy = 0.0;
  std::vector<std::string> dumps;
  std::vector<double> clear_pointing, random_pointing, literal_pointing, fidelity;
  int with_counterfactual = 0;
  int skipped = 0;
  double max_seconds = 0.0, total_seconds = 0.0;
};

EndToEnd run_end_to_end(std::size_t workers) {
  EndToEnd out;
  const auto training = synthetic::random_dataset(2000, 11);
  std::vector<LabeledImage> train, valid;
  for (std::size_t i = 0; i < training.size(); ++i) {
    (i < 1600 ? train : valid).push_back({training[i].x, training[i].truth.label == synthetic::Label::Diseased});
  }
  const auto model = train_desk_classifier(train, valid, 3);
  out.validation_accuracy = model.report().validation_accuracy;

  synthetic::DatasetOptions diseased;
  diseased.disease_ratio = 1.0;
  const auto items = synthetic::random_dataset(100, 2024, diseased);

  RunConfig config;
  config.image_segment_type = "Augmented_GAN";
  config.threshold_method = "manual";
  config.threshold_high = 0.3;
  config.threshold_low = 0.0;
  config.min_seg_size = 62;
  config.min_seg_increment = 6;
  config.workers = workers;
  auto params = config.explain_params(128, 128);
  params.workers = workers;

  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    std::vector<BinaryMask> targets;
    for (const auto& t : item.truth.targets) targets.push_back(t.mask);
    out.random_pointing.push_back(
        pointing_game(random_saliency(128, 128, 9000 + i), targets, config.pointing_options()).score);

    const auto t0 = Clock::now();
    Explanation ex;
    try {
      ex = explain(item.x, item.x_prime, model, params);
    } catch (const Error& e) {
      ++out.skipped;
      out.clear_pointing.push_back(0.0);
      out.literal_pointing.push_back(0.0);
      out.dumps.push_back(std::string("error: ") + e.what());
      continue;
    }
    const double secs = seconds_since(t0);
    out.max_seconds = std::max(out.max_seconds, secs);
    out.total_seconds += secs;

    bool small_cf = false;
    for (const auto& c : ex.counterfactuals) small_cf = small_cf || c.size() <= 4;
    out.with_counterfactual += small_cf ? 1 : 0;
    out.fidelity.insert(out.fidelity.end(), ex.fidelity.begin(), ex.fidelity.end());
    const auto saliency = explanation_saliency(ex);
    out.clear_pointing.push_back(pointing_game(saliency, targets, config.pointing_options()).score);
    out.literal_pointing.push_back(pointing_game(saliency, targets, {PointingMode::PerTarget, Polarity::Positive}).score);
    out.dumps.push_back(explanation_to_json(ex, config.sufficiency_threshold).dump(2) + "\n");
  }
  return out;
}

Outcome criterion_7(const EndToEnd& r) {
  const double cf_rate = r.with_counterfactual / 100.0;
  const auto clear = aggregate(r.clear_pointing);
  const auto random = aggregate(r.random_pointing);
  const auto literal = aggregate(r.literal_pointing);
  double mean_fid = 0.0;
  for (double f : r.fidelity) mean_fid += f;
  mean_fid = r.fidelity.empty() ? 1.0 : mean_fid / static_cast<double>(r.fidelity.size());
  const bool ok = r.validation_accuracy >= 0.95 && cf_rate >= 0.9 && clear.mean >= 0.5 && clear.mean > random.mean &&
                  !intervals_overlap(clear, random) && mean_fid <= 0.05 && r.max_seconds <= 40.0;
  return {ok, fmt("end-to-end on 100 diseased images: validation accuracy %.3f, counterfactual rate %.2f, pointing "
                  "%.3f +- %.3f vs random %.3f +- %.3f, mean fidelity error %.4f, %.2f s/image (max %.2f s), %d skipped; per-target scoring %.3f",
                  r.validation_accuracy, cf_rate, clear.mean, clear.half_width, random.mean, random.half_width, mean_fid,
                  r.total_seconds / std::max(1, 100 - r.skipped), r.max_seconds, r.skipped, literal.mean)};
}

SaliencyMap square_map(int w, int h, const std::vector<double>& per_square) {
  SaliencyMap s(w, h);
  for (int r = 0; r < kPointingGrid; ++r) {
    const auto [y0, y1] = grid_span(h, r);
    for (int c = 0; c < kPointingGrid; ++c) {
      const auto [x0, x1] = grid_span(w, c);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s(x, y) = per_square[static_cast<std::size_t>(r * kPointingGrid + c)];
    }
  }
  return s;
}

Outcome criterion_8() {
  // Squares ranked 24, 11, 3, 40; target A in squares 10-11, target B in 40.
  std::vector<double> scores(49);
  for (int i = 0; i < 49; ++i) scores[static_cast<std::size_t>(i)] = 0.1 + 0.3 * (48 - i) / 48.0;
  scores[24] = 0.9;
  scores[11] = 0.8;
  scores[3] = 0.7;
  scores[40] = 0.6;
  const std::vector<BinaryMask> two{oracle::rect_mask(14, 14, 6, 2, 10, 4), oracle::rect_mask(14, 14, 11, 11, 12, 12)};
  const auto traced = pointing_game(square_map(14, 14, scores), two, {PointingMode::PerTarget, Polarity::Positive});
  const bool trace_ok = traced.hits == 2 && traced.misses == 6 && traced.score == 0.25 &&
                        traced.visited == std::vector<int>{24, 11, 3, 40};

  SaliencyMap third(20, 20);
  const auto salient = oracle::rect_mask(20, 20, 0, 0, 10, 10);
  for (std::size_t i = 0; i < third.size(); ++i) third[i] = salient[i] ? 0.8 : 0.0;
  const std::vector<BinaryMask> target{oracle::rect_mask(20, 20, 0, 5, 10, 15)};
  const bool iou_ok = iou(third, target) == 1.0 / 3.0;

  Rng rng(808);
  int broken = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> base(49), moved(49);
    const double a = rng.uniform(0.1, 10.0), b = rng.uniform(0.0, 3.0), k = rng.uniform(0.5, 3.0);
    for (std::size_t i = 0; i < 49; ++i) {
      base[i] = rng.uniform(0.01, 1.0);
      moved[i] = a * std::pow(base[i], k) + b;
    }
    std::vector<BinaryMask> targets;
    for (int j = rng.integer(1, 3); j > 0; --j) {
      const int x0 = rng.integer(0, 27), y0 = rng.integer(0, 27);
      targets.push_back(oracle::rect_mask(28, 28, x0, y0, x0 + 1, y0 + 1));
    }
    for (auto mode : {PointingMode::PerSquare, PointingMode::PerTarget}) {
      const auto r1 = pointing_game(square_map(28, 28, base), targets, {mode, Polarity::Positive});
      const auto r2 = pointing_game(square_map(28, 28, moved), targets, {mode, Polarity::Positive});
      broken += r1.score == r2.score ? 0 : 1;
    }
    const auto noise = random_saliency(28, 28, static_cast<std::uint64_t>(t));
    SaliencyMap scaled = noise;
    const double c = rng.uniform(0.01, 100.0);
    for (auto& v : scaled.values()) v *= c;
    broken += iou(noise, targets) == iou(scaled, targets) ? 0 : 1;
  }
  return {trace_ok && iou_ok && broken == 0,
          fmt("metric fixtures: hand trace %s, IoU 1/3 %s, %d of 100 transforms changed a score",
              trace_ok ? "exact" : "WRONG", iou_ok ? "exact" : "WRONG", broken)};
}

Outcome criterion_9(const EndToEnd& a, const EndToEnd& b) {
  int differ = 0;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < a.dumps.size(); ++i) {
    bytes += a.dumps[i].size();
    differ += i < b.dumps.size() && a.dumps[i] == b.dumps[i] ? 0 : 1;
  }
  return {differ == 0 && a.dumps.size() == b.dumps.size() && !a.dumps.empty(),
          fmt("determinism: %zu explanation JSON documents (%zu bytes), %d differ between runs (1 vs 4 workers)",
              a.dumps.size(), bytes, differ)};
}

void report(int number, const std::function<Outcome()>& check, int& failed) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", number, o.detail.c_str());
  std::fflush(stdout);
  failed += o.pass ? 0 : 1;
}

}  // namespace

int main() {
  int failed = 0;
  report(1, criterion_1, failed);
  report(2, criterion_2, failed);
  report(3, criterion_3, failed);
  report(4, criterion_4, failed);
  report(5, criterion_5, failed);
  report(6, criterion_6, failed);

  EndToEnd first, second;
  std::string e2e_error;
  try {
    first = run_end_to_end(1);
    second = run_end_to_end(4);
  } catch (const std::exception& e) {
    e2e_error = e.what();
  }
  report(7, [&]() -> Outcome {
    if (!e2e_error.empty()) return {false, "exception: " + e2e_error};
    return criterion_7(first);
  }, failed);
  report(8, criterion_8, failed);
  report(9, [&]() -> Outcome {
    if (!e2e_error.empty()) return {false, "exception: " + e2e_error};
    return criterion_9(first, second);
  }, failed);
  return failed == 0 ? 0 : 1;
}
