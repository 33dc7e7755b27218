#include <cmath>
#include <numeric>
#include <string>

#include "ssstab/classifiers.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/rng.hpp"

namespace ssstab::classifiers {

namespace {

constexpr int kOutputs = static_cast<int>(modal::kLabelCount);

Eigen::MatrixXd apply(Activation a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([a](double v) { return activate(a, v); });
}

Eigen::MatrixXd apply_derivative(Activation a, const Eigen::MatrixXd& z) {
  return z.unaryExpr([a](double v) { return activate_derivative(a, v); });
}

Eigen::MatrixXd affine(const MlpLayer& l, const Eigen::MatrixXd& in) {
  return (in * l.w.transpose()).rowwise() + l.b.transpose();
}

// Mean loss over rows and its gradient w.r.t. the logits.
double loss_and_grad(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& y, Loss loss,
                     Eigen::MatrixXd* dlogits) {
  const double n = static_cast<double>(logits.rows());
  const Eigen::MatrixXd p = softmax_rows(logits);
  double total = 0.0;
  if (loss == Loss::cross_entropy) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double m = logits.row(i).maxCoeff();
      const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
      total -= (y.row(i).array() * (logits.row(i).array() - lse)).sum();
    }
    if (dlogits) *dlogits = (p - y) / n;
  } else {
    const Eigen::MatrixXd diff = p - y;
    total = diff.squaredNorm();
    if (dlogits) {
      const Eigen::MatrixXd g = 2.0 * diff / n;
      const Eigen::VectorXd gp = (g.array() * p.array()).rowwise().sum();
      *dlogits = p.array() * (g.colwise() - gp).array();
    }
  }
  return total / n;
}

// Forward and backward pass. `masks` holds inverted-dropout multipliers per hidden
// layer, or is empty for a deterministic pass.
MlpGradient backprop(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss,
                     const std::vector<Eigen::MatrixXd>& masks) {
  const std::size_t hidden = p.layers.size() - 1;
  std::vector<Eigen::MatrixXd> z(hidden), a(hidden + 1);
  a[0] = x;
  for (std::size_t l = 0; l < hidden; ++l) {
    z[l] = affine(p.layers[l], a[l]);
    a[l + 1] = apply(p.activation, z[l]);
    if (!masks.empty()) a[l + 1].array() *= masks[l].array();
  }
  const Eigen::MatrixXd logits = affine(p.layers[hidden], a[hidden]);
  MlpGradient g;
  Eigen::MatrixXd delta;
  g.loss = loss_and_grad(logits, y, loss, &delta);
  g.dw.resize(hidden + 1);
  g.db.resize(hidden + 1);
  for (std::size_t l = hidden + 1; l-- > 0;) {
    g.dw[l] = delta.transpose() * a[l];
    g.db[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd da = delta * p.layers[l].w;
    if (!masks.empty()) da.array() *= masks[l - 1].array();
    delta = da.array() * apply_derivative(p.activation, z[l - 1]).array();
  }
  return g;
}

}  // namespace

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::selu: return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
    case Activation::sigmoid: return logistic(z);
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::selu: return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
    case Activation::sigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

void MlpConfig::validate() const {
  if (hidden_layers.empty()) throw DomainError("mlp: at least one hidden layer is required");
  for (const int w : hidden_layers) {
    if (w < 1) throw DomainError("mlp: hidden layer widths must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw DomainError("mlp: dropout_rate must be in [0, 1)");
  if (epochs < 0 || batch_size < 1) throw DomainError("mlp: bad epochs or batch_size");
  if (!(learning_rate > 0.0)) throw DomainError("mlp: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("mlp: momentum must be in [0, 1)");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw DomainError("mlp: final_lr_fraction must be in (0, 1]");
  }
}

MlpParams mlp_init(int n_in, std::span<const int> hidden, int n_out, Activation activation,
                   std::uint64_t seed) {
  Rng rng(seed);
  MlpParams p;
  p.activation = activation;
  std::vector<int> widths{n_in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(n_out);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const bool output = l + 2 == widths.size();
    const double scale = (activation == Activation::relu && !output) ? 6.0 : 3.0;
    const double limit = std::sqrt(scale / fan_in);
    MlpLayer layer{Eigen::MatrixXd(widths[l + 1], fan_in), Eigen::VectorXd::Zero(widths[l + 1])};
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) layer.w(i, j) = rng.uniform(-limit, limit);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::MatrixXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& x) {
  if (p.layers.empty()) throw ShapeError("mlp_forward: no layers");
  if (x.cols() != p.layers.front().w.cols()) throw ShapeError("mlp_forward: input width mismatch");
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) a = apply(p.activation, affine(p.layers[l], a));
  return softmax_rows(affine(p.layers.back(), a));
}

double mlp_loss(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss) {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) a = apply(p.activation, affine(p.layers[l], a));
  return loss_and_grad(affine(p.layers.back(), a), y, loss, nullptr);
}

MlpGradient mlp_gradient(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss loss) {
  if (p.layers.empty()) throw ShapeError("mlp_gradient: no layers");
  if (x.rows() != y.rows() || y.cols() != p.layers.back().w.rows()) {
    throw ShapeError("mlp_gradient: target shape mismatch");
  }
  return backprop(p, x, y, loss, {});
}

ClassifierModel fit_mlp(const Dataset& train, const MlpConfig& cfg, std::vector<double>* trace) {
  cfg.validate();
  if (train.empty()) throw DomainError("fit_mlp: empty training set");
  if (train.features.cols() != 2) throw ShapeError("fit_mlp: features must have 2 columns");

  MlpParams p = mlp_init(2, cfg.hidden_layers, kOutputs, cfg.activation, sub_seed(cfg.seed, 1));
  std::vector<MlpLayer> velocity;
  for (const auto& l : p.layers) {
    velocity.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
  }
  const Eigen::MatrixXd y = dataset::encode_one_hot(train.labels);
  const std::size_t n = train.size();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t hidden = cfg.hidden_layers.size();
  const double keep = 1.0 - cfg.dropout_rate;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(sub_seed(cfg.seed, 2));
  std::vector<Eigen::MatrixXd> masks;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    const double progress = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 0.0;
    const double lr = cfg.learning_rate * (1.0 - (1.0 - cfg.final_lr_fraction) * progress);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const auto rows = static_cast<Eigen::Index>(len);
      Eigen::MatrixXd xb(rows, 2);
      Eigen::MatrixXd yb(rows, kOutputs);
      for (std::size_t i = 0; i < len; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = train.features.row(static_cast<Eigen::Index>(order[start + i]));
        yb.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(order[start + i]));
      }
      masks.clear();
      if (cfg.dropout_rate > 0.0) {
        for (std::size_t l = 0; l < hidden; ++l) {
          Eigen::MatrixXd m(rows, cfg.hidden_layers[l]);
          for (Eigen::Index j = 0; j < m.cols(); ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
          }
          masks.push_back(std::move(m));
        }
      }
      const MlpGradient g = backprop(p, xb, yb, cfg.loss, masks);
      if (!std::isfinite(g.loss)) {
        throw DivergenceError("fit_mlp: non-finite loss at epoch " + std::to_string(epoch), epoch);
      }
      epoch_loss += g.loss * static_cast<double>(len);
      for (std::size_t l = 0; l < p.layers.size(); ++l) {
        velocity[l].w = cfg.momentum * velocity[l].w - lr * g.dw[l];
        velocity[l].b = cfg.momentum * velocity[l].b - lr * g.db[l];
        p.layers[l].w += velocity[l].w;
        p.layers[l].b += velocity[l].b;
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("fit_mlp: non-finite loss at epoch " + std::to_string(epoch), epoch);
    }
    if (trace) trace->push_back(epoch_loss);
  }

  ClassifierModel m;
  m.kind = Kind::mlp;
  m.params = std::move(p);
  m.meta.seed = cfg.seed;
  m.meta.epochs = cfg.epochs;
  m.meta.hyperparameters = {{"dropout_rate", cfg.dropout_rate},
                            {"batch_size", static_cast<double>(cfg.batch_size)},
                            {"learning_rate", cfg.learning_rate},
                            {"momentum", cfg.momentum},
                            {"final_lr_fraction", cfg.final_lr_fraction},
                            {"hidden_layer_count", static_cast<double>(hidden)}};
  std::string widths;
  for (const int w : cfg.hidden_layers) widths += (widths.empty() ? "" : "x") + std::to_string(w);
  m.meta.options = {{"activation", std::string(activation_name(cfg.activation))},
                    {"loss", std::string(loss_name(cfg.loss))},
                    {"hidden_layers", widths}};
  return m;
}

}  // namespace ssstab::classifiers
