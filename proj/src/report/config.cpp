#include "contrastex/report/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "contrastex/util/parallel.hpp"

namespace contrastex {

namespace {

using Json = nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) { fail(ErrorKind::Config, key + ": " + what); }

double as_double(const std::string& key, const Json& v) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

bool as_bool(const std::string& key, const Json& v) {
  if (!v.is_boolean()) bad(key, "expected True or False");
  return v.get<bool>();
}

std::int64_t as_int(const std::string& key, const Json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  bad(key, "expected an integer");
}

std::size_t as_size(const std::string& key, const Json& v) {
  const auto i = as_int(key, v);
  if (i < 0) bad(key, "must not be negative");
  return static_cast<std::size_t>(i);
}

std::string as_string(const std::string& key, const Json& v) {
  if (!v.is_string()) bad(key, "expected text");
  return v.get<std::string>();
}

void require_value(const std::string& key, const Json& v, const Json& supported) {
  if (v != supported) bad(key, "only " + supported.dump() + " is supported");
}

using Setter = std::function<void(RunConfig&, const std::string&, const Json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"max_predictors", [](RunConfig& c, const std::string& k, const Json& v) { c.max_predictors = static_cast<int>(as_int(k, v)); }},
      {"num_samples", [](RunConfig& c, const std::string& k, const Json& v) { c.num_samples = as_size(k, v); }},
      {"counterfactual_weight", [](RunConfig& c, const std::string& k, const Json& v) { c.counterfactual_weight = as_double(k, v); }},
      {"apply_counterfactual_weights",
       [](RunConfig& c, const std::string& k, const Json& v) { c.apply_counterfactual_weights = as_bool(k, v); }},
      {"binary_decision_boundary",
       [](RunConfig& c, const std::string& k, const Json& v) { c.binary_decision_boundary = as_double(k, v); }},
      {"sufficiency_threshold", [](RunConfig& c, const std::string& k, const Json& v) { c.sufficiency_threshold = as_double(k, v); }},
      {"max_segments_in_counterfactual",
       [](RunConfig& c, const std::string& k, const Json& v) { c.max_segments_in_counterfactual = as_size(k, v); }},
      {"centering", [](RunConfig& c, const std::string& k, const Json& v) { c.centering = as_bool(k, v); }},
      {"min_segs_created_for_Augmented_GAN",
       [](RunConfig& c, const std::string& k, const Json& v) { c.min_segs_created_for_Augmented_GAN = static_cast<int>(as_int(k, v)); }},
      {"min_seg_size",
       [](RunConfig& c, const std::string& k, const Json& v) {
         c.min_seg_size = v.is_null() ? std::nullopt : std::optional(as_size(k, v));
       }},
      {"min_seg_increment",
       [](RunConfig& c, const std::string& k, const Json& v) {
         c.min_seg_increment = v.is_null() ? std::nullopt : std::optional(as_size(k, v));
       }},
      {"threshold_method", [](RunConfig& c, const std::string& k, const Json& v) { c.threshold_method = as_string(k, v); }},
      {"threshold_high", [](RunConfig& c, const std::string& k, const Json& v) { c.threshold_high = as_double(k, v); }},
      {"threshold_low", [](RunConfig& c, const std::string& k, const Json& v) { c.threshold_low = as_double(k, v); }},
      {"image_infill", [](RunConfig& c, const std::string& k, const Json& v) { c.image_infill = as_string(k, v); }},
      {"image_segment_type", [](RunConfig& c, const std::string& k, const Json& v) { c.image_segment_type = as_string(k, v); }},
      {"felzenszwalb_scale", [](RunConfig& c, const std::string& k, const Json& v) { c.felzenszwalb_scale = as_double(k, v); }},
      {"felzenszwalb_sigma", [](RunConfig& c, const std::string& k, const Json& v) { c.felzenszwalb_sigma = as_double(k, v); }},
      {"erosion_radius", [](RunConfig& c, const std::string& k, const Json& v) { c.erosion_radius = static_cast<int>(as_int(k, v)); }},
      {"max_segments", [](RunConfig& c, const std::string& k, const Json& v) { c.max_segments = static_cast<int>(as_int(k, v)); }},
      {"pointing_game_mode", [](RunConfig& c, const std::string& k, const Json& v) { c.pointing_game_mode = as_string(k, v); }},
      {"saliency_polarity", [](RunConfig& c, const std::string& k, const Json& v) { c.saliency_polarity = as_string(k, v); }},
      {"iou_threshold", [](RunConfig& c, const std::string& k, const Json& v) { c.iou_threshold = as_double(k, v); }},
      {"sweep_percents",
       [](RunConfig& c, const std::string& k, const Json& v) {
         if (!v.is_array()) bad(k, "expected a list");
         c.sweep_percents.clear();
         for (const auto& p : v) c.sweep_percents.push_back(static_cast<int>(as_int(k, p)));
       }},
      {"case_study", [](RunConfig& c, const std::string& k, const Json& v) { c.case_study = as_string(k, v); }},
      {"image_classes",
       [](RunConfig& c, const std::string& k, const Json& v) {
         if (!v.is_array()) bad(k, "expected a list");
         c.image_classes.clear();
         for (const auto& s : v) c.image_classes.push_back(as_string(k, s));
       }},
      {"seed", [](RunConfig& c, const std::string& k, const Json& v) { c.seed = static_cast<std::uint64_t>(as_size(k, v)); }},
      {"workers",
       [](RunConfig& c, const std::string& k, const Json& v) {
         c.workers = v.is_null() ? std::nullopt : std::optional(as_size(k, v));
       }},
      {"classifier_timeout_s", [](RunConfig& c, const std::string& k, const Json& v) { c.classifier_timeout_s = as_double(k, v); }},

      // Fixed behaviour.
      {"regression_type", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, "logistic"); }},
      {"score_type", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, "aic"); }},
      {"logistic_regularise", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, false); }},
      {"no_polynomimals_no_interactions", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, true); }},
      {"interactions_only", [](RunConfig&, const std::string& k, const Json& v) { as_bool(k, v); }},
      {"no_intercept", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, false); }},
      {"include_features", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, false); }},
      {"include_features_list", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, Json::array()); }},
      {"image_all_segments", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, false); }},
      {"image_use_old_synthetic", [](RunConfig&, const std::string& k, const Json& v) { as_bool(k, v); }},
      {"image_counterfactual_interactions", [](RunConfig&, const std::string& k, const Json& v) { require_value(k, v, false); }},
  };
  return table;
}

void set_key(RunConfig& config, const std::string& key, const Json& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) fail(ErrorKind::Config, "unknown key '" + key + "'");
  it->second(config, key, value);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips a trailing # comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

Json parse_literal(const std::string& text) {
  const std::string s = trim(text);
  std::string out;
  out.reserve(s.size() + 8);
  for (std::size_t i = 0; i < s.size();) {
    const char c = s[i];
    if (c == '\'' || c == '"') {
      std::string body;
      std::size_t j = i + 1;
      for (; j < s.size() && s[j] != c; ++j) {
        if (s[j] == '\\' && j + 1 < s.size()) {
          body += s[++j];
        } else {
          body += s[j];
        }
      }
      if (j >= s.size()) fail(ErrorKind::Config, "unterminated string in " + s);
      out += Json(body).dump();
      i = j + 1;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      const std::string word = s.substr(i, j - i);
      if (word == "True") out += "true";
      else if (word == "False") out += "false";
      else if (word == "None") out += "null";
      else if (word == "true" || word == "false" || word == "null") out += word;
      else if ((word[0] == 'e' || word[0] == 'E') && !out.empty() &&
               (std::isdigit(static_cast<unsigned char>(out.back())) || out.back() == '.')) out += word;  // exponent
      else return Json(s);                              // bare text
      i = j;
    } else if (c == '(') {
      out += '[';
      ++i;
    } else if (c == ')') {
      out += ']';
      ++i;
    } else {
      out += c;
      ++i;
    }
  }
  try {
    return Json::parse(out);
  } catch (const Json::exception&) {
    return Json(s);
  }
}

std::size_t scaled_segment_size(std::size_t reference, int width, int height) {
  const double area = static_cast<double>(width) * static_cast<double>(height);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(reference) * area / 65536.0)));
}

void RunConfig::validate() const {
  if (max_predictors < 0) bad("max_predictors", "must be >= 0");
  if (num_samples < 1) bad("num_samples", "must be >= 1");
  if (!(counterfactual_weight > 0)) bad("counterfactual_weight", "must be positive");
  if (!(binary_decision_boundary > 0 && binary_decision_boundary < 1)) bad("binary_decision_boundary", "must be in (0, 1)");
  if (!(sufficiency_threshold > 0 && sufficiency_threshold < 1)) bad("sufficiency_threshold", "must be in (0, 1)");
  if (max_segments_in_counterfactual < 1 || max_segments_in_counterfactual > 10) {
    bad("max_segments_in_counterfactual", "must be in [1, 10]");
  }
  if (min_segs_created_for_Augmented_GAN < 0) bad("min_segs_created_for_Augmented_GAN", "must be >= 0");
  if (min_seg_size && *min_seg_size < 1) bad("min_seg_size", "must be >= 1");
  if (min_seg_increment && *min_seg_increment < 1) bad("min_seg_increment", "must be >= 1");
  if (threshold_method != "multi_otsu" && threshold_method != "manual") bad("threshold_method", "expected multi_otsu or manual");
  if (!(0 <= threshold_low && threshold_low <= threshold_high && threshold_high <= 1)) {
    bad("threshold_low/threshold_high", "need 0 <= low <= high <= 1");
  }
  if (image_infill != "GAN" && image_infill != "black") bad("image_infill", "expected GAN or black");
  if (image_segment_type != "Augmented_GAN" && image_segment_type != "Thresholding" && image_segment_type != "Felzenszwalb") {
    bad("image_segment_type", "expected Augmented_GAN, Thresholding or Felzenszwalb");
  }
  if (!(felzenszwalb_scale > 0)) bad("felzenszwalb_scale", "must be positive");
  if (!(felzenszwalb_sigma >= 0)) bad("felzenszwalb_sigma", "must be >= 0");
  if (erosion_radius < 0) bad("erosion_radius", "must be >= 0");
  if (max_segments < 1 || max_segments > 64) bad("max_segments", "must be in [1, 64]");
  if (pointing_game_mode != "per_square" && pointing_game_mode != "per_target") {
    bad("pointing_game_mode", "expected per_square or per_target");
  }
  if (saliency_polarity != "positive" && saliency_polarity != "absolute") bad("saliency_polarity", "expected positive or absolute");
  if (!(iou_threshold >= 0 && iou_threshold < 100)) bad("iou_threshold", "must be in [0, 100)");
  if (sweep_percents.empty()) bad("sweep_percents", "must not be empty");
  for (int p : sweep_percents) {
    if (p < 0 || p >= 100) bad("sweep_percents", "entries must be in [0, 100)");
  }
  if (image_classes.size() != 0 && image_classes.size() != 2) bad("image_classes", "expected two class names");
  if (workers && *workers < 1) bad("workers", "must be >= 1");
  if (!(classifier_timeout_s > 0)) bad("classifier_timeout_s", "must be positive");
}

std::size_t RunConfig::resolved_workers() const { return workers ? *workers : default_worker_count(); }

ExplainParams RunConfig::explain_params(int width, int height) const {
  validate();
  ExplainParams p;
  auto& s = p.segmentation;
  s.min_num_low_segments = min_segs_created_for_Augmented_GAN;
  s.min_seg_size = min_seg_size ? *min_seg_size : scaled_segment_size(250, width, height);
  s.seg_size_increment = min_seg_increment ? *min_seg_increment : scaled_segment_size(25, width, height);
  s.threshold_method = threshold_method == "manual" ? ThresholdMethod::Manual : ThresholdMethod::MultiOtsu;
  s.manual_high = threshold_high;
  s.manual_low = threshold_low;
  s.felzenszwalb_scale = felzenszwalb_scale;
  s.felzenszwalb_sigma = felzenszwalb_sigma;
  s.erosion_radius = erosion_radius;
  s.type = image_segment_type == "Thresholding"   ? SegmentType::Thresholding
           : image_segment_type == "Felzenszwalb" ? SegmentType::Felzenszwalb
                                                  : SegmentType::AugmentedGan;
  s.max_segments = max_segments;
  p.max_predictors = max_predictors;
  p.counterfactual_weight = counterfactual_weight;
  p.apply_counterfactual_weights = apply_counterfactual_weights;
  p.decision_boundary = binary_decision_boundary;
  p.sufficiency_threshold = sufficiency_threshold;
  p.max_segments_in_counterfactual = max_segments_in_counterfactual;
  p.num_samples = num_samples;
  p.infill = image_infill == "black" ? Infill::Black : Infill::Contrast;
  p.fit.centering = centering;
  p.seed = seed;
  p.workers = resolved_workers();
  return p;
}

PointingGameOptions RunConfig::pointing_options() const {
  return {pointing_game_mode == "per_target" ? PointingMode::PerTarget : PointingMode::PerSquare, polarity()};
}

Polarity RunConfig::polarity() const { return saliency_polarity == "absolute" ? Polarity::Absolute : Polarity::Positive; }

Json config_to_json(const RunConfig& c) {
  auto optional_size = [](const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"max_predictors", c.max_predictors},
          {"num_samples", c.num_samples},
          {"counterfactual_weight", c.counterfactual_weight},
          {"apply_counterfactual_weights", c.apply_counterfactual_weights},
          {"binary_decision_boundary", c.binary_decision_boundary},
          {"sufficiency_threshold", c.sufficiency_threshold},
          {"max_segments_in_counterfactual", c.max_segments_in_counterfactual},
          {"centering", c.centering},
          {"min_segs_created_for_Augmented_GAN", c.min_segs_created_for_Augmented_GAN},
          {"min_seg_size", optional_size(c.min_seg_size)},
          {"min_seg_increment", optional_size(c.min_seg_increment)},
          {"threshold_method", c.threshold_method},
          {"threshold_high", c.threshold_high},
          {"threshold_low", c.threshold_low},
          {"image_infill", c.image_infill},
          {"image_segment_type", c.image_segment_type},
          {"felzenszwalb_scale", c.felzenszwalb_scale},
          {"felzenszwalb_sigma", c.felzenszwalb_sigma},
          {"erosion_radius", c.erosion_radius},
          {"max_segments", c.max_segments},
          {"pointing_game_mode", c.pointing_game_mode},
          {"saliency_polarity", c.saliency_polarity},
          {"iou_threshold", c.iou_threshold},
          {"sweep_percents", c.sweep_percents},
          {"case_study", c.case_study},
          {"image_classes", c.image_classes},
          {"seed", c.seed},
          {"workers", optional_size(c.workers)},
          {"classifier_timeout_s", c.classifier_timeout_s}};
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::Config, "configuration must be a JSON object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) set_key(config, key, value);
  config.validate();
  return config;
}

void apply_setting(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorKind::Config, "expected key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) fail(ErrorKind::Config, "empty key in '" + assignment + "'");
  set_key(config, key, parse_literal(assignment.substr(eq + 1)));
}

RunConfig parse_config(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      return config_from_json(Json::parse(body));
    } catch (const Json::exception& e) {
      fail(ErrorKind::Config, std::string("malformed JSON configuration: ") + e.what());
    }
  }
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    try {
      apply_setting(config, content);
    } catch (const Error& e) {
      fail(ErrorKind::Config, "line " + std::to_string(number) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read configuration " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace contrastex
