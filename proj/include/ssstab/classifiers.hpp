#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ssstab/dataset.hpp"
#include "ssstab/modal.hpp"

// Six from-scratch classifiers over (re, im) eigenvalue features with a
// shared fit/predict surface and a JSON model format.
namespace ssstab::classifiers {

using dataset::Dataset;
using modal::StabilityLabel;

enum class Kind { logreg, linear_svm, knn, tree, gnb, mlp };
std::string_view kind_name(Kind kind);
Kind parse_kind(std::string_view name);

// ---- distances -------------------------------------------------------------

enum class Metric { euclidean, manhattan, minkowski, hamming };

struct DistanceSpec {
  Metric metric = Metric::euclidean;
  double p = 2.0;  // minkowski order
};

std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view name);

/// Hamming counts mismatching coordinates.
double distance(std::span<const double> a, std::span<const double> b, const DistanceSpec& spec = {});

// ---- model payloads --------------------------------------------------------

/// One score row per label: score = w x + b. Used by logreg and linear_svm.
struct LinearParams {
  Eigen::MatrixXd w;  // 6 x d
  Eigen::VectorXd b;  // 6
};

struct KnnParams {
  Eigen::MatrixXd x;
  std::vector<StabilityLabel> y;
  int k = 5;
  DistanceSpec spec;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // taken when x[feature] <= threshold
  int right = -1;
  StabilityLabel label = StabilityLabel::satisfactory;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct GnbParams {
  Eigen::VectorXd log_prior;  // 6; -inf for labels absent from training
  Eigen::MatrixXd mean;       // 6 x d
  Eigen::MatrixXd var;        // 6 x d
};

enum class Activation { relu, selu, sigmoid };
enum class Loss { cross_entropy, mse };
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);
std::string_view loss_name(Loss l);
Loss parse_loss(std::string_view name);

struct MlpLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

struct MlpParams {
  std::vector<MlpLayer> layers;  // hidden layers followed by the 6-way output layer
  Activation activation = Activation::selu;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  std::map<std::string, double> hyperparameters;
  std::map<std::string, std::string> options;
};

struct ClassifierModel {
  Kind kind = Kind::logreg;
  std::variant<LinearParams, KnnParams, TreeParams, GnbParams, MlpParams> params;
  std::array<StabilityLabel, modal::kLabelCount> label_order = modal::kLabelOrder;
  TrainMeta meta;
  int n_features = 2;
};

// ---- training --------------------------------------------------------------

struct LogregConfig {
  int epochs = 500;
  double lr = 0.5;
  std::uint64_t seed = 0;
};

struct SvmConfig {
  int epochs = 30;
  double lr = 0.01;
  double c_reg = 100.0;  // L2 weight is 1 / c_reg
  std::uint64_t seed = 0;
};

struct TreeConfig {
  int max_depth = 12;
  int min_leaf = 2;
};

struct MlpConfig {
  std::vector<int> hidden_layers{100, 100, 100};
  Activation activation = Activation::selu;
  double dropout_rate = 0.2;
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.02;
  double momentum = 0.9;
  /// Learning rate falls linearly from learning_rate to learning_rate * final_lr_fraction.
  double final_lr_fraction = 0.02;
  std::uint64_t seed = 0;
  Loss loss = Loss::cross_entropy;

  void validate() const;
};

/// `loss_trace`, when given, receives the mean training loss before each update epoch and after the last.
ClassifierModel fit_logreg(const Dataset& train, const LogregConfig& cfg = {},
                           std::vector<double>* loss_trace = nullptr);
ClassifierModel fit_linear_svm(const Dataset& train, const SvmConfig& cfg = {});
ClassifierModel fit_knn(const Dataset& train, int k = 5, const DistanceSpec& spec = {});
ClassifierModel fit_tree(const Dataset& train, const TreeConfig& cfg = {});
ClassifierModel fit_gnb(const Dataset& train);
/// `loss_trace` receives the mean mini-batch loss of every epoch.
ClassifierModel fit_mlp(const Dataset& train, const MlpConfig& cfg,
                        std::vector<double>* loss_trace = nullptr);

// ---- inference -------------------------------------------------------------

std::vector<StabilityLabel> predict(const ClassifierModel& model, const Eigen::MatrixXd& features);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// ---- serialization ---------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;
std::string to_json(const ClassifierModel& model);
ClassifierModel from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_model(const std::filesystem::path& path);

// ---- building blocks -------------------------------------------------------

double logistic(double z);
Eigen::MatrixXd linear_scores(const LinearParams& p, const Eigen::MatrixXd& features);

/// Shannon entropy in bits of a label histogram.
double entropy(std::span<const std::size_t> counts);
double information_gain(std::span<const std::size_t> parent, std::span<const std::size_t> left,
                        std::span<const std::size_t> right);

double gaussian_density(double x, double mean, double var);
/// Variance floor applied to every GNB feature variance.
inline constexpr double kVarianceFloor = 1e-9;

/// round(n_samples / (alpha (n_in + n_out) 10)), at least 1.
int hidden_neurons_heuristic(long long n_samples, int n_in, int n_out, double alpha);

// MLP internals, exposed for gradient checking.
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;
double activate(Activation a, double z);
double activate_derivative(Activation a, double z);
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
MlpParams mlp_init(int n_in, std::span<const int> hidden, int n_out, Activation activation,
                   std::uint64_t seed);
/// Softmax probabilities, one row per sample, dropout inactive.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x);
double mlp_loss(const MlpParams& params, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_one_hot,
                Loss loss);

struct MlpGradient {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
  double loss = 0.0;
};
/// Exact backpropagated gradient of mlp_loss (no dropout).
MlpGradient mlp_gradient(const MlpParams& params, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y_one_hot, Loss loss);

}  // namespace ssstab::classifiers
