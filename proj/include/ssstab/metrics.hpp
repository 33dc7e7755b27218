#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ssstab/classifiers.hpp"
#include "ssstab/dataset.hpp"
#include "ssstab/modal.hpp"

// Confusion matrices, accuracy/precision/recall/F1 and the benchmark sweep.
namespace ssstab::metrics {

using modal::StabilityLabel;

struct ConfusionMatrix {
  // rows: true label, columns: predicted label, fixed label order
  std::array<std::array<std::uint64_t, modal::kLabelCount>, modal::kLabelCount> counts{};

  std::uint64_t total() const;
};

ConfusionMatrix confusion(std::span<const StabilityLabel> y_true, std::span<const StabilityLabel> y_pred);

enum class Averaging { macro, micro };

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct ScoreReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::array<ClassScore, modal::kLabelCount> per_class{};
  double predict_seconds = 0.0;
  std::size_t n_test = 0;
  bool absent_class = false;  // some label never occurs in y_true; it contributes 0 to macro averages
  Averaging averaging = Averaging::macro;
};

/// One-vs-rest scores for a single class from its tally.
ClassScore binary_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

ScoreReport scores(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro);

/// predict_seconds is the minimum wall-clock time of `repeats` full predict calls.
ScoreReport timed_evaluate(const classifiers::ClassifierModel& model, const dataset::Dataset& test,
                           int repeats = 3, Averaging averaging = Averaging::macro);

struct BenchConfig {
  std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<int> hidden_layer_counts{1, 2, 3, 5, 7, 10};
  int hidden_width = 100;
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  int repeats = 3;
  int knn_k = 5;
  classifiers::LogregConfig logreg{};
  classifiers::SvmConfig svm{};
  classifiers::TreeConfig tree{};
  classifiers::MlpConfig mlp{};  // hidden_layers is replaced per sweep entry
  bool include_classical = true;
};

struct BenchRow {
  double fraction = 1.0;
  std::string algorithm;
  int hidden_layers = 0;  // 0 for the classical models
  std::size_t n_train = 0;
  ScoreReport report;
};

/// For each fraction: subsample, balance, split, fit every model, time prediction.
std::vector<BenchRow> benchmark_sweep(const dataset::Dataset& ds, const BenchConfig& cfg,
                                      const std::function<void(const BenchRow&)>& on_row = {});

void write_sweep_csv(std::ostream& out, std::span<const BenchRow> rows, bool include_timing = true);
std::string sweep_markdown(std::span<const BenchRow> rows);

}  // namespace ssstab::metrics
