#include "contrastex/report/artifacts.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "contrastex/imaging/image_io.hpp"
#include "contrastex/imaging/saliency.hpp"

namespace contrastex {

namespace {

using Json = nlohmann::json;

Json names(const std::vector<int>& ids) {
  Json out = Json::array();
  for (int id : ids) out.push_back(segment_name(id));
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string join(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ", " : "") + segment_name(ids[i]);
  return out;
}

}  // namespace

SaliencyMap explanation_saliency(const Explanation& ex) {
  std::map<int, double> scores;
  for (int id = 1; id <= ex.segments().count(); ++id) {
    const auto it = ex.scores.find(id);
    scores[id] = it == ex.scores.end() ? 0.0 : it->second;
  }
  return render_saliency(scores, ex.segments().labels());
}

Json explanation_to_json(const Explanation& ex, double sufficiency_threshold) {
  Json segments = ex.segments().to_json();
  for (auto& s : segments["segments"]) {
    const int id = s["id"].get<int>();
    const auto it = ex.scores.find(id);
    s["selected"] = it != ex.scores.end();
    s["score"] = it != ex.scores.end() ? Json(it->second) : Json(nullptr);
  }
  const auto& seg = ex.segmentation;
  segments["thresholds"] = {{"high", seg.thresholds.high}, {"low", seg.thresholds.low}};
  segments["final_min_seg_size"] = seg.final_min_seg_size;
  segments["iterations"] = seg.iterations;
  segments["single_segment_counterfactuals"] = seg.single_counterfactuals;
  segments["high_intensity_count"] = seg.high_count;
  segments["low_intensity_count"] = seg.low_count;

  Json scores = Json::object();
  for (const auto& [id, w] : ex.scores) scores[segment_name(id)] = w;

  Json counterfactuals = Json::array();
  for (std::size_t i = 0; i < ex.counterfactuals.size(); ++i) {
    const auto& c = ex.counterfactuals[i];
    counterfactuals.push_back({{"replaced", c.replaced},
                               {"replaced_names", names(c.replaced)},
                               {"probability", c.probability},
                               {"regression_probability", ex.regression.predict(c.vector)},
                               {"fidelity_error", ex.fidelity[i]}});
  }

  Json coefficients = Json::object();
  for (const auto& [id, w] : ex.regression.coefficients) coefficients[segment_name(id)] = w;

  return {{"y_original", ex.y_original},
          {"segments", segments},
          {"G", scores},
          {"C", counterfactuals},
          {"regression",
           {{"intercept", ex.regression.intercept},
            {"coefficients", coefficients},
            {"selection_order", names(ex.selected)},
            {"aic", ex.regression.aic},
            {"log_likelihood", ex.regression.log_likelihood},
            {"iterations", ex.regression.n_iterations},
            {"converged", ex.regression.converged},
            {"ridge_used", ex.regression.ridge_used}}},
          {"O",
           {{"sufficiency_threshold", sufficiency_threshold},
            {"sufficient", names(ex.overdetermination.sufficient)},
            {"overdetermined", ex.overdetermination.overdetermined}}},
          {"causal_roles",
           {{"sufficient", names(ex.roles.sufficient)},
            {"necessary", names(ex.roles.necessary)},
            {"necessary_but_insufficient", names(ex.roles.necessary_insufficient)}}},
          {"e", ex.fidelity},
          {"goodness_of_fit",
           {{"aic", ex.regression.aic},
            {"max_fidelity_error", ex.max_fidelity_error},
            {"mean_fidelity_error", ex.mean_fidelity_error}}},
          {"perturbations", {{"evaluated", ex.records.size()}, {"enumerated", ex.enumerated_total}}},
          {"warnings", ex.warnings}};
}

std::string text_report(const Explanation& ex, double sufficiency_threshold) {
  std::ostringstream out;
  out << "Classification probability of the original image: " << fixed(ex.y_original, 4) << "\n";
  out << "Segments: " << ex.segments().count() << " (" << ex.segmentation.high_count << " high-intensity, "
      << ex.segmentation.low_count << " low-intensity before capping)\n\n";

  out << "Counterfactuals\n";
  if (ex.counterfactuals.empty()) out << "  none found\n";
  for (std::size_t i = 0; i < ex.counterfactuals.size(); ++i) {
    const auto& c = ex.counterfactuals[i];
    out << "  substituting " << join(c.replaced) << ": regression " << fixed(ex.regression.predict(c.vector), 2)
        << ", classifier " << fixed(c.probability, 2) << ", fidelity error " << fixed(ex.fidelity[i], 2) << "\n";
  }

  out << "\nRegression equation\n  logit(p) = " << fixed(ex.regression.intercept, 2);
  for (const auto& [id, w] : ex.regression.coefficients) {
    out << (w < 0 ? " - " : " + ") << fixed(std::abs(w), 2) << " " << segment_name(id);
  }
  out << "\n  AIC " << fixed(ex.regression.aic, 2) << (ex.regression.converged ? "" : " (not converged)") << "\n";

  out << "\nSegment scores\n";
  if (ex.scores.empty()) out << "  no segment selected\n";
  for (const auto& [id, w] : ex.scores) out << "  " << segment_name(id) << " " << fixed(w, 2) << "\n";

  out << "\nSufficient causes (logit > " << fixed(logit(sufficiency_threshold), 1) << ")\n";
  if (ex.overdetermination.sufficient.empty()) out << "  none\n";
  for (int id : ex.overdetermination.sufficient) {
    out << "  " << segment_name(id) << ": " << fixed(ex.regression.intercept + ex.regression.coefficients.at(id), 1)
        << " (i.e. " << fixed(ex.regression.coefficients.at(id), 1) << " " << (ex.regression.intercept < 0 ? "- " : "+ ")
        << fixed(std::abs(ex.regression.intercept), 1) << ")\n";
  }
  if (ex.overdetermination.overdetermined) {
    out << "  overdetermination: " << join(ex.overdetermination.sufficient) << " are each sufficient\n";
  }

  out << "\nNecessary but insufficient causes\n";
  if (ex.roles.necessary_insufficient.empty()) out << "  none\n";
  for (int id : ex.roles.necessary_insufficient) out << "  " << segment_name(id) << "\n";

  out << "\nFidelity: max " << fixed(ex.max_fidelity_error, 4) << ", mean " << fixed(ex.mean_fidelity_error, 4) << "\n";
  if (!ex.warnings.empty()) {
    out << "\nWarnings\n";
    for (const auto& w : ex.warnings) out << "  " << w << "\n";
  }
  return out.str();
}

std::string perturbation_csv(const Explanation& ex) {
  const int n = ex.segments().count();
  std::ostringstream out;
  out << std::setprecision(17);
  for (int id = 1; id <= n; ++id) out << segment_name(id) << ",";
  out << "probability,is_counterfactual\n";
  for (int id = 1; id <= n; ++id) out << "1,";
  out << ex.y_original << ",0\n";
  for (const auto& r : ex.records) {
    for (auto bit : r.vector.bits()) out << static_cast<int>(bit) << ",";
    out << r.probability << "," << (r.is_counterfactual ? 1 : 0) << "\n";
  }
  return out.str();
}

std::vector<std::filesystem::path> ArtifactPaths::all() const {
  return {explanation_json, report_txt, saliency_png, saliency_json, segments_png, segments_json, perturbations_csv};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

ArtifactPaths write_explanation_artifacts(const std::filesystem::path& directory, const Explanation& ex, const Image& x,
                                          double sufficiency_threshold) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + directory.string() + ": " + ec.message());
  ArtifactPaths paths{directory / "explanation.json", directory / "report.txt",    directory / "saliency.png",
                      directory / "saliency.json",    directory / "segments.png",  directory / "segments.json",
                      directory / "perturbations.csv"};
  const SaliencyMap saliency = explanation_saliency(ex);
  write_json(paths.explanation_json, explanation_to_json(ex, sufficiency_threshold));
  write_text(paths.report_txt, text_report(ex, sufficiency_threshold));
  save_png(saliency_overlay(x, saliency), paths.saliency_png);
  write_json(paths.saliency_json, saliency_to_json(saliency));
  save_png(label_visualization(ex.segments().labels()), paths.segments_png);
  write_json(paths.segments_json, ex.segments().to_json());
  write_text(paths.perturbations_csv, perturbation_csv(ex));
  return paths;
}

}  // namespace contrastex
