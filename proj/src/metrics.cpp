#include "ssstab/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "ssstab/errors.hpp"
#include "ssstab/rng.hpp"
#include "text_util.hpp"

namespace ssstab::metrics {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (const auto c : row) t += c;
  }
  return t;
}

ConfusionMatrix confusion(std::span<const StabilityLabel> y_true, std::span<const StabilityLabel> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("confusion: y_true has " + std::to_string(y_true.size()) + " entries, y_pred " +
                     std::to_string(y_pred.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm.counts[modal::label_index(y_true[i])][modal::label_index(y_pred[i])];
  }
  return cm;
}

ClassScore binary_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassScore s;
  s.support = tp + fn;
  s.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

ScoreReport scores(const ConfusionMatrix& cm, Averaging averaging) {
  const auto total = cm.total();
  if (total == 0) throw DomainError("scores: empty confusion matrix");
  constexpr std::size_t n = modal::kLabelCount;
  ScoreReport r;
  r.averaging = averaging;
  r.n_test = static_cast<std::size_t>(total);
  std::uint64_t correct = 0;
  for (std::size_t c = 0; c < n; ++c) correct += cm.counts[c][c];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);

  std::uint64_t sum_tp = 0, sum_fp = 0, sum_fn = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const std::uint64_t tp = cm.counts[c][c];
    std::uint64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    r.per_class[c] = binary_scores(tp, fp, fn);
    if (r.per_class[c].support == 0) r.absent_class = true;
    sum_tp += tp;
    sum_fp += fp;
    sum_fn += fn;
  }
  if (averaging == Averaging::micro) {
    const auto s = binary_scores(sum_tp, sum_fp, sum_fn);
    r.precision = s.precision;
    r.recall = s.recall;
    r.f1 = s.f1;
  } else {
    for (const auto& s : r.per_class) {
      r.precision += s.precision;
      r.recall += s.recall;
      r.f1 += s.f1;
    }
    r.precision /= static_cast<double>(n);
    r.recall /= static_cast<double>(n);
    r.f1 /= static_cast<double>(n);
  }
  return r;
}

ScoreReport timed_evaluate(const classifiers::ClassifierModel& model, const dataset::Dataset& test,
                           int repeats, Averaging averaging) {
  if (test.empty()) throw DomainError("timed_evaluate: empty test set");
  if (repeats < 1) throw DomainError("timed_evaluate: repeats must be >= 1");
  double best = std::numeric_limits<double>::infinity();
  std::vector<StabilityLabel> pred;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    pred = classifiers::predict(model, test.features);
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  auto r = scores(confusion(test.labels, pred), averaging);
  r.predict_seconds = std::max(best, 1e-9);
  return r;
}

std::vector<BenchRow> benchmark_sweep(const dataset::Dataset& ds, const BenchConfig& cfg,
                                      const std::function<void(const BenchRow&)>& on_row) {
  if (cfg.fractions.empty()) throw DomainError("benchmark_sweep: no fractions");
  for (const int h : cfg.hidden_layer_counts) {
    if (h < 1) throw DomainError("benchmark_sweep: hidden layer counts must be >= 1");
  }
  std::vector<BenchRow> rows;
  for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
    const double fraction = cfg.fractions[fi];
    const auto base = sub_seed(cfg.seed, fi);
    const auto sub = dataset::subsample(ds, fraction, sub_seed(base, 1));
    const auto balanced = dataset::balance(sub, sub_seed(base, 2));
    const auto parts = dataset::split(balanced, cfg.train_fraction, sub_seed(base, 3));

    auto emit = [&](std::string algorithm, int hidden, const classifiers::ClassifierModel& model) {
      BenchRow row{fraction, std::move(algorithm), hidden, parts.train.size(),
                   timed_evaluate(model, parts.test, cfg.repeats)};
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    };

    if (cfg.include_classical) {
      auto lr = cfg.logreg;
      lr.seed = sub_seed(base, 10);
      emit("logreg", 0, classifiers::fit_logreg(parts.train, lr));
      auto svm = cfg.svm;
      svm.seed = sub_seed(base, 11);
      emit("linear_svm", 0, classifiers::fit_linear_svm(parts.train, svm));
      emit("knn", 0, classifiers::fit_knn(parts.train, cfg.knn_k));
      emit("tree", 0, classifiers::fit_tree(parts.train, cfg.tree));
      emit("gnb", 0, classifiers::fit_gnb(parts.train));
    }
    for (const int h : cfg.hidden_layer_counts) {
      auto mlp = cfg.mlp;
      mlp.hidden_layers.assign(static_cast<std::size_t>(h), cfg.hidden_width);
      mlp.seed = sub_seed(base, 100 + static_cast<std::uint64_t>(h));
      emit("mlp", h, classifiers::fit_mlp(parts.train, mlp));
    }
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, std::span<const BenchRow> rows, bool include_timing) {
  out << "fraction,algorithm,hidden_layers," << (include_timing ? "predict_seconds," : "")
      << "accuracy,precision,recall,f1\n";
  for (const auto& r : rows) {
    out << detail::fmt17(r.fraction) << ',' << r.algorithm << ',' << r.hidden_layers << ',';
    if (include_timing) out << detail::fmt17(r.report.predict_seconds) << ',';
    out << detail::fmt17(r.report.accuracy) << ',' << detail::fmt17(r.report.precision) << ','
        << detail::fmt17(r.report.recall) << ',' << detail::fmt17(r.report.f1) << '\n';
  }
}

std::string sweep_markdown(std::span<const BenchRow> rows) {
  std::ostringstream md;
  md << "| fraction | algorithm | hidden_layers | predict_seconds | accuracy | precision | recall | f1 |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    md << "| " << fixed(r.fraction, 2) << " | " << r.algorithm << " | " << r.hidden_layers << " | "
       << fixed(r.report.predict_seconds, 4) << " | " << fixed(r.report.accuracy, 4) << " | "
       << fixed(r.report.precision, 4) << " | " << fixed(r.report.recall, 4) << " | "
       << fixed(r.report.f1, 4) << " |\n";
  }
  return md.str();
}

}  // namespace ssstab::metrics
