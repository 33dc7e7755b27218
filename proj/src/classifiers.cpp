#include "ssstab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ssstab/errors.hpp"
#include "ssstab/rng.hpp"

namespace ssstab::classifiers {

namespace {

using json = nlohmann::json;
constexpr auto kClasses = static_cast<Eigen::Index>(modal::kLabelCount);

std::size_t present_classes(const Dataset& ds) {
  const auto c = ds.class_counts();
  return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [](std::size_t n) { return n > 0; }));
}

void require_rows(const Dataset& ds, const char* who) {
  if (ds.empty()) throw DomainError(std::string(who) + ": empty training set");
  if (ds.features.cols() != 2) throw ShapeError(std::string(who) + ": features must have 2 columns");
}

void require_multiclass(const Dataset& ds, const char* who) {
  require_rows(ds, who);
  if (present_classes(ds) < 2) throw DomainError(std::string(who) + ": training set has a single class");
}

StabilityLabel majority(const std::array<std::size_t, modal::kLabelCount>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return modal::kLabelOrder[best];
}

// ---- JSON helpers ----

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("model: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v(i)) && v(i) < 0) {
      out.push_back(nullptr);
    } else {
      out.push_back(v(i));
    }
  }
  return out;
}

Eigen::VectorXd json_vector(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        j[i].is_null() ? -std::numeric_limits<double>::infinity() : j[i].get<double>();
  }
  return v;
}

}  // namespace

// ---- names -----------------------------------------------------------------

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::logreg: return "logreg";
    case Kind::linear_svm: return "linear_svm";
    case Kind::knn: return "knn";
    case Kind::tree: return "tree";
    case Kind::gnb: return "gnb";
    case Kind::mlp: return "mlp";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  for (auto k : {Kind::logreg, Kind::linear_svm, Kind::knn, Kind::tree, Kind::gnb, Kind::mlp}) {
    if (kind_name(k) == name) return k;
  }
  throw DomainError("unknown classifier kind '" + std::string(name) + "'");
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::minkowski: return "minkowski";
    case Metric::hamming: return "hamming";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (auto m : {Metric::euclidean, Metric::manhattan, Metric::minkowski, Metric::hamming}) {
    if (metric_name(m) == name) return m;
  }
  throw DomainError("unknown distance metric '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::selu: return "selu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::relu, Activation::selu, Activation::sigmoid}) {
    if (activation_name(a) == name) return a;
  }
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

std::string_view loss_name(Loss l) { return l == Loss::cross_entropy ? "cross_entropy" : "mse"; }

Loss parse_loss(std::string_view name) {
  if (name == "cross_entropy") return Loss::cross_entropy;
  if (name == "mse") return Loss::mse;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

// ---- distances -------------------------------------------------------------

double distance(std::span<const double> a, std::span<const double> b, const DistanceSpec& spec) {
  if (a.size() != b.size()) throw ShapeError("distance: vector lengths differ");
  double acc = 0.0;
  switch (spec.metric) {
    case Metric::euclidean:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(acc);
    case Metric::manhattan:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    case Metric::minkowski:
      if (!(spec.p >= 1.0)) throw DomainError("distance: minkowski order must be >= 1");
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), spec.p);
      return std::pow(acc, 1.0 / spec.p);
    case Metric::hamming:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] != b[i]) ? 1.0 : 0.0;
      return acc;
  }
  return acc;
}

// ---- building blocks -------------------------------------------------------

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd linear_scores(const LinearParams& p, const Eigen::MatrixXd& x) {
  return (x * p.w.transpose()).rowwise() + p.b.transpose();
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double entropy(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain(std::span<const std::size_t> parent, std::span<const std::size_t> left,
                        std::span<const std::size_t> right) {
  const auto total = [](std::span<const std::size_t> c) {
    return static_cast<double>(std::accumulate(c.begin(), c.end(), std::size_t{0}));
  };
  const double n = total(parent);
  if (n == 0.0) return 0.0;
  return entropy(parent) - total(left) / n * entropy(left) - total(right) / n * entropy(right);
}

double gaussian_density(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

int hidden_neurons_heuristic(long long n_samples, int n_in, int n_out, double alpha) {
  if (n_samples <= 0 || n_in <= 0 || n_out <= 0 || !(alpha > 0.0)) {
    throw DomainError("hidden_neurons_heuristic: all arguments must be positive");
  }
  const double v = static_cast<double>(n_samples) / (alpha * (n_in + n_out) * 10.0);
  return std::max(1, static_cast<int>(std::llround(v)));
}

// ---- logistic regression ---------------------------------------------------

ClassifierModel fit_logreg(const Dataset& train, const LogregConfig& cfg, std::vector<double>* trace) {
  require_multiclass(train, "fit_logreg");
  if (cfg.epochs < 0 || !(cfg.lr > 0.0)) throw DomainError("fit_logreg: bad epochs or learning rate");
  const Eigen::MatrixXd& x = train.features;
  const Eigen::MatrixXd y = dataset::encode_one_hot(train.labels);
  const double n = static_cast<double>(train.size());
  LinearParams p{Eigen::MatrixXd::Zero(kClasses, x.cols()), Eigen::VectorXd::Zero(kClasses)};

  auto step = [&](bool update) {
    const Eigen::MatrixXd z = linear_scores(p, x);
    const Eigen::MatrixXd prob = softmax_rows(z);
    if (trace) {
      double loss = 0.0;
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        const double lse = m + std::log((z.row(i).array() - m).exp().sum());
        loss -= (y.row(i).array() * (z.row(i).array() - lse)).sum();
      }
      trace->push_back(loss / n);
    }
    if (!update) return;
    const Eigen::MatrixXd g = (prob - y) / n;
    p.w -= cfg.lr * (g.transpose() * x);
    p.b -= cfg.lr * g.colwise().sum().transpose();
  };
  for (int e = 0; e < cfg.epochs; ++e) step(true);
  if (trace) step(false);

  ClassifierModel m;
  m.kind = Kind::logreg;
  m.params = std::move(p);
  m.meta.seed = cfg.seed;
  m.meta.epochs = cfg.epochs;
  m.meta.hyperparameters = {{"lr", cfg.lr}};
  return m;
}

// ---- linear SVM ------------------------------------------------------------

ClassifierModel fit_linear_svm(const Dataset& train, const SvmConfig& cfg) {
  require_multiclass(train, "fit_linear_svm");
  if (cfg.epochs < 0 || !(cfg.lr > 0.0) || !(cfg.c_reg > 0.0)) {
    throw DomainError("fit_linear_svm: bad epochs, learning rate or c_reg");
  }
  const Eigen::MatrixXd& x = train.features;
  const double lambda = 1.0 / cfg.c_reg;
  LinearParams p{Eigen::MatrixXd::Zero(kClasses, x.cols()), Eigen::VectorXd::Zero(kClasses)};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  for (int e = 0; e < cfg.epochs; ++e) {
    rng.shuffle(std::span<std::size_t>(order));
    for (const auto i : order) {
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const auto label = static_cast<Eigen::Index>(modal::label_index(train.labels[i]));
      for (Eigen::Index c = 0; c < kClasses; ++c) {
        const double y = (c == label) ? 1.0 : -1.0;
        const double margin = y * (p.w.row(c).dot(row) + p.b(c));
        p.w.row(c) *= (1.0 - cfg.lr * lambda);
        if (margin < 1.0) {
          p.w.row(c) += cfg.lr * y * row;
          p.b(c) += cfg.lr * y;
        }
      }
    }
  }
  ClassifierModel m;
  m.kind = Kind::linear_svm;
  m.params = std::move(p);
  m.meta.seed = cfg.seed;
  m.meta.epochs = cfg.epochs;
  m.meta.hyperparameters = {{"lr", cfg.lr}, {"c_reg", cfg.c_reg}};
  return m;
}

// ---- k-NN ------------------------------------------------------------------

ClassifierModel fit_knn(const Dataset& train, int k, const DistanceSpec& spec) {
  require_rows(train, "fit_knn");
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw DomainError("fit_knn: k must be in [1, " + std::to_string(train.size()) + "]");
  }
  if (spec.metric == Metric::minkowski && !(spec.p >= 1.0)) {
    throw DomainError("fit_knn: minkowski order must be >= 1");
  }
  ClassifierModel m;
  m.kind = Kind::knn;
  m.params = KnnParams{train.features, train.labels, k, spec};
  m.meta.hyperparameters = {{"k", static_cast<double>(k)}, {"p", spec.p}};
  m.meta.options = {{"metric", std::string(metric_name(spec.metric))}};
  return m;
}

namespace {

std::vector<StabilityLabel> predict_knn(const KnnParams& p, const Eigen::MatrixXd& q) {
  const auto n = static_cast<std::size_t>(p.x.rows());
  const auto k = static_cast<std::size_t>(p.k);
  const auto d = static_cast<std::size_t>(p.x.cols());
  // Row-major copy for contiguous access in the inner loop.
  std::vector<double> train(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      train[i * d + j] = p.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<double> query(d);
  std::vector<StabilityLabel> out;
  out.reserve(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) query[j] = q(r, static_cast<Eigen::Index>(j));
    if (p.spec.metric == Metric::euclidean) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = train[i * d + j] - query[j];
          acc += diff * diff;
        }
        dist[i] = {acc, i};
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = {distance(std::span<const double>(&train[i * d], d), query, p.spec), i};
      }
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::array<std::size_t, modal::kLabelCount> votes{};
    for (std::size_t i = 0; i < k; ++i) ++votes[modal::label_index(p.y[dist[i].second])];
    out.push_back(majority(votes));
  }
  return out;
}

}  // namespace

// ---- decision tree ---------------------------------------------------------

namespace {

using Counts = std::array<std::size_t, modal::kLabelCount>;

struct TreeBuilder {
  const Dataset& ds;
  TreeConfig cfg;
  std::vector<TreeNode> nodes;

  Counts count(std::span<const std::size_t> rows) const {
    Counts c{};
    for (const auto r : rows) ++c[modal::label_index(ds.labels[r])];
    return c;
  }

  int build(std::vector<std::size_t> rows, int depth) {
    const Counts parent = count(rows);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, majority(parent)});
    const auto min_leaf = static_cast<std::size_t>(cfg.min_leaf);
    if (depth >= cfg.max_depth || rows.size() < 2 * min_leaf || entropy(parent) == 0.0) return id;

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (Eigen::Index f = 0; f < ds.features.cols(); ++f) {
      std::vector<std::size_t> sorted = rows;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return ds.features(static_cast<Eigen::Index>(a), f) < ds.features(static_cast<Eigen::Index>(b), f);
      });
      Counts left{};
      Counts right = parent;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto li = modal::label_index(ds.labels[sorted[i]]);
        ++left[li];
        --right[li];
        const double a = ds.features(static_cast<Eigen::Index>(sorted[i]), f);
        const double b = ds.features(static_cast<Eigen::Index>(sorted[i + 1]), f);
        if (a == b) continue;
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf || sorted.size() - n_left < min_leaf) continue;
        const double gain = information_gain(parent, left, right);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best_threshold = t;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> lrows, rrows;
    for (const auto r : rows) {
      if (ds.features(static_cast<Eigen::Index>(r), best_feature) <= best_threshold) {
        lrows.push_back(r);
      } else {
        rrows.push_back(r);
      }
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(std::move(lrows), depth + 1);
    const int r = build(std::move(rrows), depth + 1);
    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

std::vector<StabilityLabel> predict_tree(const TreeParams& p, const Eigen::MatrixXd& q) {
  std::vector<StabilityLabel> out;
  out.reserve(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    std::size_t node = 0;
    while (p.nodes[node].feature >= 0) {
      const auto& nd = p.nodes[node];
      node = static_cast<std::size_t>(q(r, nd.feature) <= nd.threshold ? nd.left : nd.right);
    }
    out.push_back(p.nodes[node].label);
  }
  return out;
}

}  // namespace

ClassifierModel fit_tree(const Dataset& train, const TreeConfig& cfg) {
  require_rows(train, "fit_tree");
  if (cfg.max_depth < 0 || cfg.min_leaf < 1) throw DomainError("fit_tree: bad max_depth or min_leaf");
  TreeBuilder builder{train, cfg, {}};
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(std::move(rows), 0);
  ClassifierModel m;
  m.kind = Kind::tree;
  m.params = TreeParams{std::move(builder.nodes)};
  m.meta.hyperparameters = {{"max_depth", static_cast<double>(cfg.max_depth)},
                            {"min_leaf", static_cast<double>(cfg.min_leaf)}};
  return m;
}

// ---- Gaussian naive Bayes --------------------------------------------------

ClassifierModel fit_gnb(const Dataset& train) {
  require_rows(train, "fit_gnb");
  const auto counts = train.class_counts();
  const auto d = train.features.cols();
  GnbParams p{Eigen::VectorXd::Constant(kClasses, -std::numeric_limits<double>::infinity()),
              Eigen::MatrixXd::Zero(kClasses, d), Eigen::MatrixXd::Zero(kClasses, d)};
  const double n = static_cast<double>(train.size());
  for (std::size_t c = 0; c < modal::kLabelCount; ++c) {
    if (counts[c] == 0) continue;
    if (counts[c] < 2) {
      throw DomainError("fit_gnb: class '" + std::string(modal::label_name(modal::kLabelOrder[c])) +
                        "' has fewer than 2 rows");
    }
    const auto ci = static_cast<Eigen::Index>(c);
    p.log_prior(ci) = std::log(static_cast<double>(counts[c]) / n);
    for (Eigen::Index f = 0; f < d; ++f) {
      std::vector<double> v;
      v.reserve(counts[c]);
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (modal::label_index(train.labels[i]) == c) v.push_back(train.features(static_cast<Eigen::Index>(i), f));
      }
      std::sort(v.begin(), v.end());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (const double x : v) ss += (x - mean) * (x - mean);
      p.mean(ci, f) = mean;
      p.var(ci, f) = std::max(ss / static_cast<double>(v.size()), kVarianceFloor);
    }
  }
  ClassifierModel m;
  m.kind = Kind::gnb;
  m.params = std::move(p);
  return m;
}

namespace {

std::vector<StabilityLabel> predict_gnb(const GnbParams& p, const Eigen::MatrixXd& q) {
  std::vector<StabilityLabel> out;
  out.reserve(static_cast<std::size_t>(q.rows()));
  std::array<double, modal::kLabelCount> score{};
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (Eigen::Index c = 0; c < kClasses; ++c) {
      double s = p.log_prior(c);
      if (std::isfinite(s)) {
        for (Eigen::Index f = 0; f < q.cols(); ++f) {
          const double v = p.var(c, f);
          const double dx = q(r, f) - p.mean(c, f);
          s += -0.5 * std::log(2.0 * std::numbers::pi * v) - dx * dx / (2.0 * v);
        }
      }
      score[static_cast<std::size_t>(c)] = s;
    }
    out.push_back(modal::kLabelOrder[argmax(score)]);
  }
  return out;
}

std::vector<StabilityLabel> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<StabilityLabel> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  std::array<double, modal::kLabelCount> row{};
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    for (Eigen::Index c = 0; c < kClasses; ++c) row[static_cast<std::size_t>(c)] = scores(r, c);
    out.push_back(modal::kLabelOrder[argmax(row)]);
  }
  return out;
}

}  // namespace

// ---- inference -------------------------------------------------------------

std::vector<StabilityLabel> predict(const ClassifierModel& model, const Eigen::MatrixXd& features) {
  if (features.rows() == 0) return {};
  if (features.cols() != model.n_features) {
    throw ShapeError("predict: expected " + std::to_string(model.n_features) + " feature columns, got " +
                     std::to_string(features.cols()));
  }
  switch (model.kind) {
    case Kind::logreg:
    case Kind::linear_svm:
      return argmax_rows(linear_scores(std::get<LinearParams>(model.params), features));
    case Kind::knn:
      return predict_knn(std::get<KnnParams>(model.params), features);
    case Kind::tree:
      return predict_tree(std::get<TreeParams>(model.params), features);
    case Kind::gnb:
      return predict_gnb(std::get<GnbParams>(model.params), features);
    case Kind::mlp:
      return argmax_rows(mlp_forward(std::get<MlpParams>(model.params), features));
  }
  return {};
}

// ---- serialization ---------------------------------------------------------

std::string to_json(const ClassifierModel& m) {
  json params;
  switch (m.kind) {
    case Kind::logreg:
    case Kind::linear_svm: {
      const auto& p = std::get<LinearParams>(m.params);
      params = {{"w", matrix_json(p.w)}, {"b", vector_json(p.b)}};
      break;
    }
    case Kind::knn: {
      const auto& p = std::get<KnnParams>(m.params);
      json labels = json::array();
      for (const auto l : p.y) labels.push_back(modal::label_name(l));
      params = {{"k", p.k}, {"metric", metric_name(p.spec.metric)}, {"p", p.spec.p},
                {"x", matrix_json(p.x)}, {"y", labels}};
      break;
    }
    case Kind::tree: {
      const auto& p = std::get<TreeParams>(m.params);
      json nodes = json::array();
      for (const auto& n : p.nodes) {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                         {"right", n.right}, {"label", modal::label_name(n.label)}});
      }
      params = {{"nodes", nodes}};
      break;
    }
    case Kind::gnb: {
      const auto& p = std::get<GnbParams>(m.params);
      params = {{"log_prior", vector_json(p.log_prior)}, {"mean", matrix_json(p.mean)},
                {"var", matrix_json(p.var)}};
      break;
    }
    case Kind::mlp: {
      const auto& p = std::get<MlpParams>(m.params);
      json layers = json::array();
      for (const auto& l : p.layers) layers.push_back({{"w", matrix_json(l.w)}, {"b", vector_json(l.b)}});
      params = {{"activation", activation_name(p.activation)}, {"layers", layers}};
      break;
    }
  }
  json labels = json::array();
  for (const auto l : m.label_order) labels.push_back(modal::label_name(l));
  json meta = {{"seed", m.meta.seed}, {"epochs", m.meta.epochs},
               {"hyperparameters", m.meta.hyperparameters}, {"options", m.meta.options}};
  json doc = {{"format_version", kModelFormatVersion}, {"kind", kind_name(m.kind)},
              {"label_order", labels}, {"n_features", m.n_features}, {"train_meta", meta},
              {"parameters", params}};
  return doc.dump(1);
}

ClassifierModel from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw ParseError("model: unsupported format_version");
    }
    ClassifierModel m;
    m.kind = parse_kind(doc.at("kind").get<std::string>());
    const auto& labels = doc.at("label_order");
    if (labels.size() != modal::kLabelCount) throw ParseError("model: label_order must list 6 labels");
    for (std::size_t i = 0; i < modal::kLabelCount; ++i) {
      if (modal::parse_label(labels[i].get<std::string>()) != modal::kLabelOrder[i]) {
        throw ParseError("model: label_order differs from the fixed order");
      }
    }
    m.n_features = doc.value("n_features", 2);
    const auto& meta = doc.at("train_meta");
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.epochs = meta.at("epochs").get<int>();
    m.meta.hyperparameters = meta.at("hyperparameters").get<std::map<std::string, double>>();
    m.meta.options = meta.value("options", std::map<std::string, std::string>{});
    const auto& p = doc.at("parameters");
    switch (m.kind) {
      case Kind::logreg:
      case Kind::linear_svm:
        m.params = LinearParams{json_matrix(p.at("w"), m.n_features), json_vector(p.at("b"))};
        break;
      case Kind::knn: {
        KnnParams k;
        k.k = p.at("k").get<int>();
        k.spec.metric = parse_metric(p.at("metric").get<std::string>());
        k.spec.p = p.at("p").get<double>();
        k.x = json_matrix(p.at("x"), m.n_features);
        for (const auto& l : p.at("y")) k.y.push_back(modal::parse_label(l.get<std::string>()));
        if (k.y.size() != static_cast<std::size_t>(k.x.rows()) || k.k < 1 ||
            static_cast<std::size_t>(k.k) > k.y.size()) {
          throw ParseError("model: inconsistent knn payload");
        }
        m.params = std::move(k);
        break;
      }
      case Kind::tree: {
        TreeParams t;
        for (const auto& n : p.at("nodes")) {
          t.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                             n.at("left").get<int>(), n.at("right").get<int>(),
                             modal::parse_label(n.at("label").get<std::string>())});
        }
        const auto count = static_cast<int>(t.nodes.size());
        if (count == 0) throw ParseError("model: empty tree");
        for (const auto& n : t.nodes) {
          if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                                 n.feature >= m.n_features)) {
            throw ParseError("model: tree node references are out of range");
          }
        }
        m.params = std::move(t);
        break;
      }
      case Kind::gnb:
        m.params = GnbParams{json_vector(p.at("log_prior")), json_matrix(p.at("mean"), m.n_features),
                             json_matrix(p.at("var"), m.n_features)};
        break;
      case Kind::mlp: {
        MlpParams mp;
        mp.activation = parse_activation(p.at("activation").get<std::string>());
        for (const auto& l : p.at("layers")) mp.layers.push_back({json_matrix(l.at("w")), json_vector(l.at("b"))});
        if (mp.layers.empty()) throw ParseError("model: MLP has no layers");
        m.params = std::move(mp);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: malformed document: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ClassifierModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model) << '\n';
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace ssstab::classifiers
