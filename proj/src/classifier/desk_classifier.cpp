#include "contrastex/classifier/desk_classifier.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "contrastex/util/random.hpp"

namespace contrastex {

std::vector<double> pooled_features(const Image& image, int pool) {
  if (pool < 1 || pool > image.width() || pool > image.height()) {
    fail(ErrorKind::InvalidArgument, "pool size must be in [1, min(width, height)]");
  }
  std::vector<double> features(static_cast<std::size_t>(pool) * static_cast<std::size_t>(pool), 0.0);
  const int w = image.width();
  const int h = image.height();
  for (int r = 0; r < pool; ++r) {
    const int y0 = r * h / pool;
    const int y1 = (r + 1) * h / pool;
    for (int c = 0; c < pool; ++c) {
      const int x0 = c * w / pool;
      const int x1 = (c + 1) * w / pool;
      double total = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) total += image(x, y);
      }
      features[static_cast<std::size_t>(r * pool + c)] = total / ((y1 - y0) * (x1 - x0));
    }
  }
  return features;
}

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double stable_sigmoid(double z) { return sigmoid(z); }

// Parameter layout inside one flat vector.
struct Layout {
  Eigen::Index features = 0;
  Eigen::Index hidden = 0;  // 0 means logistic

  Eigen::Index size() const { return hidden == 0 ? features + 1 : hidden * features + 2 * hidden + 1; }
};

struct Adam {
  Eigen::VectorXd m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  explicit Adam(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void apply(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

// Mean cross-entropy gradient over a batch, plus the L2 term on weights.
Eigen::VectorXd batch_gradient(const Layout& layout, const Eigen::VectorXd& theta, const Eigen::MatrixXd& z,
                               const Eigen::VectorXd& y, double l2) {
  const Eigen::Index n = z.rows();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.size());
  if (layout.hidden == 0) {
    const auto w = theta.head(layout.features);
    const double b = theta(layout.features);
    const Eigen::VectorXd out = (z * w).array() + b;
    Eigen::VectorXd delta(n);
    for (Eigen::Index i = 0; i < n; ++i) delta(i) = stable_sigmoid(out(i)) - y(i);
    grad.head(layout.features) = z.transpose() * delta / static_cast<double>(n) + l2 * w;
    grad(layout.features) = delta.mean();
    return grad;
  }
  const Eigen::Index f = layout.features;
  const Eigen::Index h = layout.hidden;
  const Eigen::Map<const Eigen::MatrixXd> w1(theta.data(), h, f);
  const auto b1 = theta.segment(h * f, h);
  const auto w2 = theta.segment(h * f + h, h);
  const double b2 = theta(h * f + 2 * h);

  const Eigen::MatrixXd act = ((z * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  const Eigen::VectorXd out = (act * w2).array() + b2;
  Eigen::VectorXd delta(n);
  for (Eigen::Index i = 0; i < n; ++i) delta(i) = stable_sigmoid(out(i)) - y(i);
  const Eigen::MatrixXd delta_hidden = (delta * w2.transpose()).array() * (1.0 - act.array().square());

  Eigen::Map<Eigen::MatrixXd> gw1(grad.data(), h, f);
  gw1 = delta_hidden.transpose() * z / static_cast<double>(n) + l2 * w1;
  grad.segment(h * f, h) = delta_hidden.colwise().mean().transpose();
  grad.segment(h * f + h, h) = act.transpose() * delta / static_cast<double>(n) + l2 * w2;
  grad(h * f + 2 * h) = delta.mean();
  return grad;
}

}  // namespace

double DeskClassifier::forward(const Eigen::VectorXd& z) const {
  if (model_ == DeskModel::Logistic) return sigmoid(output_weights_.dot(z) + output_bias_);
  const Eigen::VectorXd act = (hidden_weights_ * z + hidden_bias_).array().tanh();
  return sigmoid(output_weights_.dot(act) + output_bias_);
}

double DeskClassifier::probability(const Image& image) const {
  if (image.width() != width_ || image.height() != height_) fail(ErrorKind::DimensionMismatch, "desk classifier input size");
  const Eigen::VectorXd raw = to_eigen(pooled_features(image, pool_));
  const Eigen::VectorXd z = (raw - feature_mean_).cwiseQuotient(feature_scale_);
  return forward(z);
}

std::string DeskClassifier::description() const {
  std::ostringstream out;
  out << "desk " << (model_ == DeskModel::Mlp ? "mlp" : "logistic") << " over " << pool_ << "x" << pool_
      << " pooled features, validation accuracy " << report_.validation_accuracy;
  return out.str();
}

nlohmann::json DeskClassifier::to_json() const {
  nlohmann::json j;
  j["kind"] = "desk";
  j["model"] = model_ == DeskModel::Mlp ? "mlp" : "logistic";
  j["width"] = width_;
  j["height"] = height_;
  j["pool"] = pool_;
  j["feature_mean"] = to_std(feature_mean_);
  j["feature_scale"] = to_std(feature_scale_);
  if (model_ == DeskModel::Mlp) {
    j["hidden_units"] = hidden_weights_.rows();
    j["hidden_weights"] = std::vector<double>(hidden_weights_.data(), hidden_weights_.data() + hidden_weights_.size());
    j["hidden_bias"] = to_std(hidden_bias_);
  }
  j["output_weights"] = to_std(output_weights_);
  j["output_bias"] = output_bias_;
  j["report"] = {{"train_accuracy", report_.train_accuracy},
                 {"validation_accuracy", report_.validation_accuracy},
                 {"train_size", report_.train_size},
                 {"validation_size", report_.validation_size},
                 {"epochs", report_.epochs}};
  return j;
}

DeskClassifier DeskClassifier::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "desk") fail(ErrorKind::Config, "not a desk classifier file");
    DeskClassifier c;
    const auto model = j.at("model").get<std::string>();
    if (model != "mlp" && model != "logistic") fail(ErrorKind::Config, "unknown desk model '" + model + "'");
    c.model_ = model == "mlp" ? DeskModel::Mlp : DeskModel::Logistic;
    c.width_ = j.at("width").get<int>();
    c.height_ = j.at("height").get<int>();
    c.pool_ = j.at("pool").get<int>();
    c.feature_mean_ = to_eigen(j.at("feature_mean").get<std::vector<double>>());
    c.feature_scale_ = to_eigen(j.at("feature_scale").get<std::vector<double>>());
    const auto features = static_cast<Eigen::Index>(c.pool_) * c.pool_;
    if (c.feature_mean_.size() != features || c.feature_scale_.size() != features) {
      fail(ErrorKind::Config, "desk classifier feature vectors have the wrong length");
    }
    if (c.model_ == DeskModel::Mlp) {
      const auto hidden = j.at("hidden_units").get<Eigen::Index>();
      const auto flat = j.at("hidden_weights").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(flat.size()) != hidden * features) fail(ErrorKind::Config, "hidden weight size mismatch");
      c.hidden_weights_ = Eigen::Map<const Eigen::MatrixXd>(flat.data(), hidden, features);
      c.hidden_bias_ = to_eigen(j.at("hidden_bias").get<std::vector<double>>());
    }
    c.output_weights_ = to_eigen(j.at("output_weights").get<std::vector<double>>());
    c.output_bias_ = j.at("output_bias").get<double>();
    if (j.contains("report")) {
      const auto& r = j["report"];
      c.report_.train_accuracy = r.value("train_accuracy", 0.0);
      c.report_.validation_accuracy = r.value("validation_accuracy", 0.0);
      c.report_.train_size = r.value("train_size", std::size_t{0});
      c.report_.validation_size = r.value("validation_size", std::size_t{0});
      c.report_.epochs = r.value("epochs", 0);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed desk classifier: ") + e.what());
  }
}

void DeskClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

DeskClassifier DeskClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open classifier file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, std::string("classifier file is not JSON: ") + e.what());
  }
}

bool operator==(const DeskClassifier& a, const DeskClassifier& b) { return a.to_json() == b.to_json(); }

double accuracy(const Classifier& classifier, const std::vector<LabeledImage>& data, double boundary) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : data) {
    if (classify(classifier, item.image, boundary).positive == item.positive) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

DeskClassifier train_desk_classifier(const std::vector<LabeledImage>& train, const std::vector<LabeledImage>& valid,
                                     std::uint64_t seed, const DeskTrainingOptions& options) {
  if (train.empty() || valid.empty()) fail(ErrorKind::InvalidArgument, "training and validation splits must be non-empty");
  const auto positives = std::count_if(train.begin(), train.end(), [](const auto& s) { return s.positive; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train.size())) {
    fail(ErrorKind::SingleClassTraining, "training split contains a single class");
  }
  const int width = train.front().image.width();
  const int height = train.front().image.height();
  for (const auto* split : {&train, &valid}) {
    for (const auto& s : *split) {
      if (s.image.width() != width || s.image.height() != height) fail(ErrorKind::DimensionMismatch, "mixed image sizes");
    }
  }

  DeskClassifier model;
  model.model_ = options.model;
  model.width_ = width;
  model.height_ = height;
  model.pool_ = options.pool;
  const Eigen::Index features = static_cast<Eigen::Index>(options.pool) * options.pool;
  const auto n = static_cast<Eigen::Index>(train.size());

  Eigen::MatrixXd raw(n, features);
  Eigen::VectorXd labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    raw.row(i) = to_eigen(pooled_features(train[static_cast<std::size_t>(i)].image, options.pool)).transpose();
    labels(i) = train[static_cast<std::size_t>(i)].positive ? 1.0 : 0.0;
  }
  model.feature_mean_ = raw.colwise().mean().transpose();
  model.feature_scale_ = ((raw.rowwise() - model.feature_mean_.transpose()).array().square().colwise().mean().sqrt() + 1e-3)
                             .matrix()
                             .transpose();
  const Eigen::MatrixXd z = (raw.rowwise() - model.feature_mean_.transpose()).array().rowwise() /
                            model.feature_scale_.transpose().array();

  const Layout layout{features, options.model == DeskModel::Mlp ? options.hidden_units : 0};
  Rng rng(seed);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.size());
  if (layout.hidden > 0) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(features));
    for (Eigen::Index k = 0; k < layout.hidden * features; ++k) theta(k) = rng.normal(0.0, scale);
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(layout.hidden));
    for (Eigen::Index k = 0; k < layout.hidden; ++k) theta(layout.hidden * features + layout.hidden + k) = rng.normal(0.0, out_scale);
  }

  Adam adam(layout.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<Eigen::Index>(std::max(1, options.batch_size));
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index size = std::min(batch, n - start);
      Eigen::MatrixXd zb(size, features);
      Eigen::VectorXd yb(size);
      for (Eigen::Index k = 0; k < size; ++k) {
        const auto row = order[static_cast<std::size_t>(start + k)];
        zb.row(k) = z.row(row);
        yb(k) = labels(row);
      }
      adam.apply(theta, batch_gradient(layout, theta, zb, yb, options.l2), options.learning_rate);
    }
  }

  if (layout.hidden == 0) {
    model.output_weights_ = theta.head(features);
    model.output_bias_ = theta(features);
  } else {
    const Eigen::Index h = layout.hidden;
    model.hidden_weights_ = Eigen::Map<const Eigen::MatrixXd>(theta.data(), h, features);
    model.hidden_bias_ = theta.segment(h * features, h);
    model.output_weights_ = theta.segment(h * features + h, h);
    model.output_bias_ = theta(h * features + 2 * h);
  }
  model.report_.epochs = options.epochs;
  model.report_.train_size = train.size();
  model.report_.validation_size = valid.size();
  model.report_.train_accuracy = accuracy(model, train);
  model.report_.validation_accuracy = accuracy(model, valid);
  return model;
}

}  // namespace contrastex
