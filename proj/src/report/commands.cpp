#include "contrastex/report/commands.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "contrastex/classifier/subprocess_classifier.hpp"
#include "contrastex/imaging/image_io.hpp"
#include "contrastex/synthetic/scene.hpp"

namespace contrastex {

namespace {

using Json = nlohmann::json;

Aggregate summarize(const std::vector<double>& values) {
  if (values.size() >= 2) return aggregate(values);
  Aggregate a;
  a.n = values.size();
  a.mean = values.empty() ? 0.0 : values.front();
  return a;
}

Json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"ci95_half_width", a.half_width}, {"lower", a.lower()}, {"upper", a.upper()}, {"n", a.n}};
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::optional<SaliencyMap> load_external_saliency(const std::filesystem::path& dir, const std::string& id) {
  for (const char* ext : {".json", ".png", ".pgm"}) {
    const auto path = dir / (id + "_saliency" + ext);
    if (std::filesystem::exists(path)) return load_saliency(path);
  }
  return std::nullopt;
}

ImageScore score_map(const std::string& id, const std::string& method, const SaliencyMap& saliency,
                     const std::vector<BinaryMask>& targets, const RunConfig& config) {
  ImageScore s;
  s.id = id;
  s.method = method;
  const auto pg = pointing_game(saliency, targets, config.pointing_options());
  s.hits = pg.hits;
  s.misses = pg.misses;
  s.pointing = pg.score;
  // A map with nothing salient overlaps no target.
  auto safe_iou = [&](double pct) {
    try {
      return iou(saliency, targets, pct, config.polarity());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroSaliency) throw;
      return 0.0;
    }
  };
  s.iou = safe_iou(config.iou_threshold);
  for (int p : config.sweep_percents) s.sweep[p] = safe_iou(p);
  return s;
}

MethodSummary summarize_method(const std::string& method, const std::vector<ImageScore>& images,
                               const std::vector<int>& percents) {
  MethodSummary m;
  m.method = method;
  std::vector<double> pg, io;
  std::map<int, std::vector<double>> sweep;
  for (const auto& s : images) {
    if (s.method != method) continue;
    pg.push_back(s.pointing);
    io.push_back(s.iou);
    for (const auto& [p, v] : s.sweep) sweep[p].push_back(v);
  }
  m.pointing = summarize(pg);
  m.iou = summarize(io);
  double best = -1.0;
  for (int p : percents) {
    m.sweep[p] = summarize(sweep[p]);
    if (m.sweep[p].mean > best) {
      best = m.sweep[p].mean;
      m.best_sweep_percent = p;
    }
  }
  return m;
}

std::uint64_t baseline_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EvaluationSummary run_evaluation(const RunConfig& config, const EvaluateOptions& options) {
  config.validate();
  if (!options.classifier && !options.saliency_dir) {
    fail(ErrorKind::Config, "evaluation needs a classifier or a saliency directory");
  }
  const auto items = synthetic::load_dataset(options.dataset);
  std::vector<const synthetic::DatasetItem*> diseased;
  for (const auto& item : items) {
    if (!item.truth.targets.empty()) diseased.push_back(&item);
  }
  if (diseased.empty()) fail(ErrorKind::Config, "dataset " + options.dataset.string() + " has no annotated items");

  ClassifierHandle classifier;
  if (options.classifier) classifier = open_classifier(*options.classifier, config);
  const std::string method = classifier ? "explained" : "external";
  if (classifier && options.save_saliency) ensure_directory(options.output / "saliency");

  EvaluationSummary summary;
  std::size_t with_counterfactual = 0;
  std::vector<double> fidelity;
  for (std::size_t i = 0; i < diseased.size(); ++i) {
    const auto& item = *diseased[i];
    std::vector<BinaryMask> targets;
    for (const auto& t : item.truth.targets) targets.push_back(t.mask);

    ImageScore score;
    if (classifier) {
      Explanation ex;
      try {
        ex = explain(item.x, item.x_prime, *classifier, config.explain_params(item.x.width(), item.x.height()));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotPositiveClass && e.kind() != ErrorKind::NoSegmentsFound) throw;
        summary.skipped.push_back(item.id + ": " + e.what());
        continue;
      }
      const auto saliency = explanation_saliency(ex);
      if (options.save_saliency) write_json(options.output / "saliency" / (item.id + "_saliency.json"), saliency_to_json(saliency));
      score = score_map(item.id, method, saliency, targets, config);
      score.counterfactual_count = ex.counterfactuals.size();
      score.has_counterfactual = std::any_of(ex.counterfactuals.begin(), ex.counterfactuals.end(), [&](const Counterfactual& c) {
        return c.size() <= config.max_segments_in_counterfactual;
      });
      score.mean_fidelity_error = ex.mean_fidelity_error;
      with_counterfactual += score.has_counterfactual ? 1 : 0;
      fidelity.insert(fidelity.end(), ex.fidelity.begin(), ex.fidelity.end());
    } else {
      const auto saliency = load_external_saliency(*options.saliency_dir, item.id);
      if (!saliency) {
        summary.skipped.push_back(item.id + ": no saliency map");
        continue;
      }
      score = score_map(item.id, method, *saliency, targets, config);
    }
    summary.images.push_back(score);
    summary.images.push_back(score_map(item.id, "random",
                                       random_saliency(item.x.width(), item.x.height(), baseline_seed(config.seed, i)),
                                       targets, config));
  }
  if (summary.images.empty()) fail(ErrorKind::Io, "no item could be evaluated");
  if (classifier) {
    summary.counterfactual_rate = static_cast<double>(with_counterfactual) / static_cast<double>(diseased.size());
    if (!fidelity.empty()) {
      double total = 0.0;
      for (double f : fidelity) total += f;
      summary.mean_fidelity_error = total / static_cast<double>(fidelity.size());
    }
  }
  summary.methods.push_back(summarize_method(method, summary.images, config.sweep_percents));
  summary.methods.push_back(summarize_method("random", summary.images, config.sweep_percents));
  return summary;
}

Json summary_json(const EvaluationSummary& summary, const RunConfig& config, std::size_t attempted) {
  Json methods = Json::object();
  for (const auto& m : summary.methods) {
    Json sweep = Json::object();
    for (const auto& [p, a] : m.sweep) sweep[std::to_string(p)] = aggregate_json(a);
    methods[m.method] = {{"pointing_game", aggregate_json(m.pointing)},
                         {"iou", aggregate_json(m.iou)},
                         {"iou_sweep", sweep},
                         {"best_sweep_percent", m.best_sweep_percent}};
  }
  return {{"images", attempted},
          {"skipped", summary.skipped},
          {"counterfactual_rate", summary.counterfactual_rate},
          {"mean_fidelity_error", summary.mean_fidelity_error},
          {"iou_threshold", config.iou_threshold},
          {"pointing_game_mode", config.pointing_game_mode},
          {"methods", methods}};
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Io:
      return 3;
    case ErrorKind::SubprocessFailure:
    case ErrorKind::SingleClassTraining:
      return 4;
    default:
      return 5;
  }
}

ClassifierHandle open_classifier(const std::string& spec, const RunConfig& config) {
  constexpr std::string_view kSubprocess = "subprocess:";
  constexpr std::string_view kDesk = "desk:";
  if (spec.starts_with(kSubprocess)) {
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(config.classifier_timeout_s * 1000.0));
    return std::make_shared<SubprocessClassifier>(spec.substr(kSubprocess.size()), timeout);
  }
  const std::string path = spec.starts_with(kDesk) ? spec.substr(kDesk.size()) : spec;
  if (path.empty()) fail(ErrorKind::Config, "empty classifier specification");
  return std::make_shared<DeskClassifier>(DeskClassifier::load(path));
}

void cmd_generate(const GenerateOptions& options) {
  if (options.count < 1) fail(ErrorKind::Config, "count must be >= 1");
  if (!(options.disease_ratio >= 0.0 && options.disease_ratio <= 1.0)) fail(ErrorKind::Config, "disease ratio must be in [0, 1]");
  synthetic::DatasetOptions dataset;
  dataset.width = options.width;
  dataset.height = options.height;
  dataset.disease_ratio = options.disease_ratio;
  synthetic::export_dataset(synthetic::random_dataset(options.count, options.seed, dataset), options.output, dataset,
                            options.seed);
}

TrainingReport cmd_train(const TrainOptions& options) {
  if (!(options.validation_fraction > 0.0 && options.validation_fraction < 1.0)) {
    fail(ErrorKind::Config, "validation fraction must be in (0, 1)");
  }
  std::vector<LabeledImage> all;
  if (options.dataset) {
    for (auto& item : synthetic::load_dataset(*options.dataset)) {
      all.push_back({std::move(item.x), item.truth.label == synthetic::Label::Diseased});
    }
  } else {
    for (auto& pair : synthetic::random_dataset(options.generate_count, options.seed)) {
      all.push_back({std::move(pair.x), pair.truth.label == synthetic::Label::Diseased});
    }
  }
  if (all.size() < 2) fail(ErrorKind::Config, "training needs at least two images");
  const auto n_valid = std::clamp<std::size_t>(
      static_cast<std::size_t>(static_cast<double>(all.size()) * options.validation_fraction), 1, all.size() - 1);
  std::vector<LabeledImage> valid(all.end() - static_cast<std::ptrdiff_t>(n_valid), all.end());
  all.resize(all.size() - n_valid);

  const DeskClassifier model = train_desk_classifier(all, valid, options.seed, options.training);
  model.save(options.output);
  const auto& r = model.report();
  auto report_path = options.output;
  report_path.replace_filename(options.output.stem().string() + "_report.json");
  write_json(report_path, {{"train_accuracy", r.train_accuracy},
                           {"validation_accuracy", r.validation_accuracy},
                           {"train_size", r.train_size},
                           {"validation_size", r.validation_size},
                           {"epochs", r.epochs},
                           {"seed", options.seed}});
  return r;
}

ArtifactPaths cmd_explain(const RunConfig& config, const ExplainPaths& paths) {
  config.validate();
  const Image x = load_image(paths.x);
  const Image x_prime = load_image(paths.x_prime);
  const auto classifier = open_classifier(paths.classifier, config);
  const auto ex = explain(x, x_prime, *classifier, config.explain_params(x.width(), x.height()));
  auto written = write_explanation_artifacts(paths.output, ex, x, config.sufficiency_threshold);
  write_json(paths.output / "resolved_config.json", config_to_json(config));
  return written;
}

EvaluationSummary cmd_evaluate(const RunConfig& config, const EvaluateOptions& options) {
  ensure_directory(options.output);
  auto summary = run_evaluation(config, options);

  std::ostringstream csv;
  csv << std::setprecision(17) << "id,method,hits,misses,pointing_game,iou,counterfactuals,mean_fidelity_error\n";
  for (const auto& s : summary.images) {
    csv << s.id << ',' << s.method << ',' << s.hits << ',' << s.misses << ',' << s.pointing << ',' << s.iou << ','
        << s.counterfactual_count << ',' << s.mean_fidelity_error << '\n';
  }
  write_text(options.output / "per_image.csv", csv.str());
  const std::size_t attempted = summary.images.size() / 2 + summary.skipped.size();
  write_json(options.output / "aggregate.json", summary_json(summary, config, attempted));

  std::vector<BarSeries> bars;
  for (const auto& m : summary.methods) bars.push_back({m.method, m.pointing});
  write_text(options.output / "chart.svg", bar_chart_svg("Pointing game (95% CI)", bars));
  return summary;
}

EvaluationSummary cmd_sweep(const RunConfig& config, const EvaluateOptions& options) {
  ensure_directory(options.output);
  auto summary = run_evaluation(config, options);
  Json out = Json::object();
  std::ostringstream csv;
  csv << std::setprecision(17) << "method,percent,mean_iou,ci95_half_width\n";
  for (const auto& m : summary.methods) {
    Json per = Json::object();
    for (const auto& [p, a] : m.sweep) {
      per[std::to_string(p)] = aggregate_json(a);
      csv << m.method << ',' << p << ',' << a.mean << ',' << a.half_width << '\n';
    }
    out[m.method] = {{"percents", per}, {"best_percent", m.best_sweep_percent}};
  }
  write_json(options.output / "sweep.json", out);
  write_text(options.output / "sweep.csv", csv.str());
  return summary;
}

}  // namespace contrastex
