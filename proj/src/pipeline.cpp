#include "ssstab/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ssstab/contingency.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/grid.hpp"
#include "ssstab/rng.hpp"
#include "text_util.hpp"

namespace ssstab::pipeline {

using json = nlohmann::json;

std::string islanding_name(IslandingPolicy p) {
  return p == IslandingPolicy::discard ? "discard" : "label-unstable";
}

IslandingPolicy parse_islanding(const std::string& name) {
  if (name == "discard") return IslandingPolicy::discard;
  if (name == "label-unstable") return IslandingPolicy::label_unstable;
  throw UsageError("unknown islanding policy '" + name + "' (expected discard or label-unstable)");
}

std::string source_name(DataSource s) { return s == DataSource::grid ? "grid" : "synthetic"; }

DataSource parse_source(const std::string& name) {
  if (name == "grid") return DataSource::grid;
  if (name == "synthetic") return DataSource::synthetic;
  throw UsageError("unknown data source '" + name + "' (expected grid or synthetic)");
}

void RunConfig::validate() const {
  if (budget < 1) throw UsageError("budget must be >= 1");
  thresholds.validate();
  if (synthetic_per_class < 1) throw UsageError("synthetic_per_class must be >= 1");
  if (!(snap_tolerance >= 0.0)) throw UsageError("snap_tolerance must be >= 0");
  for (const double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("fractions must lie in (0, 1]");
  }
  for (const int l : layer_counts) {
    if (l < 1) throw UsageError("layer counts must be >= 1");
  }
  if (hidden_width < 1 || mlp_epochs < 1 || knn_k < 1 || repeats < 1) {
    throw UsageError("hidden_width, mlp_epochs, knn_k and repeats must be >= 1");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("train_fraction must lie in (0, 1)");
}

json to_json(const RunConfig& cfg) {
  return json{{"case_path", cfg.case_path},
              {"budget", cfg.budget},
              {"seed", cfg.seed},
              {"thresholds",
               {{"critical_max_pct", cfg.thresholds.critical_max_pct},
                {"acceptable_max_pct", cfg.thresholds.acceptable_max_pct},
                {"good_max_pct", cfg.thresholds.good_max_pct},
                {"irrelevant_is_real_axis", cfg.thresholds.irrelevant_is_real_axis}}},
              {"islanding", islanding_name(cfg.islanding)},
              {"source", source_name(cfg.source)},
              {"synthetic_per_class", cfg.synthetic_per_class},
              {"snap_tolerance", cfg.snap_tolerance},
              {"fractions", cfg.fractions},
              {"layer_counts", cfg.layer_counts},
              {"hidden_width", cfg.hidden_width},
              {"mlp_epochs", cfg.mlp_epochs},
              {"knn_k", cfg.knn_k},
              {"train_fraction", cfg.train_fraction},
              {"repeats", cfg.repeats},
              {"out_dir", cfg.out_dir}};
}

RunConfig run_config_from_json(const json& j, RunConfig cfg) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "case_path") cfg.case_path = v.get<std::string>();
      else if (key == "budget") cfg.budget = v.get<std::uint64_t>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "thresholds") {
        for (const auto& [tk, tv] : v.items()) {
          if (tk == "critical_max_pct") cfg.thresholds.critical_max_pct = tv.get<double>();
          else if (tk == "acceptable_max_pct") cfg.thresholds.acceptable_max_pct = tv.get<double>();
          else if (tk == "good_max_pct") cfg.thresholds.good_max_pct = tv.get<double>();
          else if (tk == "irrelevant_is_real_axis") cfg.thresholds.irrelevant_is_real_axis = tv.get<bool>();
          else throw UsageError("unknown config key 'thresholds." + tk + "'");
        }
      } else if (key == "islanding") cfg.islanding = parse_islanding(v.get<std::string>());
      else if (key == "source") cfg.source = parse_source(v.get<std::string>());
      else if (key == "synthetic_per_class") cfg.synthetic_per_class = v.get<std::size_t>();
      else if (key == "snap_tolerance") cfg.snap_tolerance = v.get<double>();
      else if (key == "fractions") cfg.fractions = v.get<std::vector<double>>();
      else if (key == "layer_counts") cfg.layer_counts = v.get<std::vector<int>>();
      else if (key == "hidden_width") cfg.hidden_width = v.get<int>();
      else if (key == "mlp_epochs") cfg.mlp_epochs = v.get<int>();
      else if (key == "knn_k") cfg.knn_k = v.get<int>();
      else if (key == "train_fraction") cfg.train_fraction = v.get<double>();
      else if (key == "repeats") cfg.repeats = v.get<int>();
      else if (key == "out_dir") cfg.out_dir = v.get<std::string>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, std::move(base));
}

std::filesystem::path resolve_case(const std::string& case_path) {
  const std::filesystem::path p(case_path);
  if (std::filesystem::exists(p)) return p;
  const auto bundled = grid::bundled_case(case_path);
  if (std::filesystem::exists(bundled)) return bundled;
  throw ValidationError("case file not found: " + case_path);
}

GenResult generate_records(const RunConfig& cfg) {
  cfg.validate();
  GenResult out;
  GenReport& rep = out.report;
  rep.source = source_name(cfg.source);
  rep.budget = cfg.budget;
  rep.seed = cfg.seed;

  if (cfg.source == DataSource::synthetic) {
    dataset::SyntheticConfig sc;
    sc.per_class = cfg.synthetic_per_class;
    sc.thresholds = cfg.thresholds;
    out.records = dataset::synthetic_records(sc, cfg.seed);
  } else {
    const auto gc = grid::load_case(resolve_case(cfg.case_path));
    const auto scenarios = contingency::sample_contingencies(gc, cfg.budget, cfg.seed);
    rep.scenarios = scenarios.size();
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const auto id = static_cast<std::int64_t>(i + 1);
      ++rep.scenarios_per_order[scenarios[i].order()];
      grid::SystemMatrix sm;
      try {
        sm = grid::linearize_classical(gc, scenarios[i]);
      } catch (const SingularInteriorError&) {
        ++rep.islanding;
        if (cfg.islanding == IslandingPolicy::discard) {
          ++rep.discarded;
        } else {
          out.records.push_back(modal::make_record({1.0, 0.0}, cfg.thresholds, id));
        }
        continue;
      }
      const auto eigs = modal::snap_small(modal::eigenvalues(sm.a), cfg.snap_tolerance);
      for (const auto& e : eigs) out.records.push_back(modal::make_record(e, cfg.thresholds, id));
    }
  }
  for (const auto& r : out.records) ++rep.histogram[modal::label_index(r.label)];
  rep.rows = out.records.size();
  return out;
}

json report_json(const GenReport& r) {
  json per_order = json::object();
  for (const auto& [k, n] : r.scenarios_per_order) per_order[std::to_string(k)] = n;
  json hist = json::object();
  for (const auto label : modal::kLabelOrder) hist[std::string(modal::label_name(label))] = r.histogram[modal::label_index(label)];
  return json{{"source", r.source},       {"budget", r.budget},       {"seed", r.seed},
              {"scenarios", r.scenarios}, {"scenarios_per_order", per_order},
              {"islanding", r.islanding}, {"discarded", r.discarded}, {"class_histogram", hist},
              {"rows", r.rows}};
}

namespace {

class Params {
 public:
  Params(const std::map<std::string, std::string>& raw, std::string algo) : raw_(raw), algo_(std::move(algo)) {}

  double number(const std::string& key, double fallback) {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    const auto v = detail::to_double(it->second);
    if (!v || !std::isfinite(*v)) throw UsageError("hyperparameter " + key + "='" + it->second + "' is not a number");
    return *v;
  }

  int integer(const std::string& key, int fallback) {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    const auto v = detail::to_int(it->second);
    if (!v) throw UsageError("hyperparameter " + key + "='" + it->second + "' is not an integer");
    return static_cast<int>(*v);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  void finish() const {
    for (const auto& [k, v] : raw_) {
      if (!used_.count(k)) throw UsageError("unknown hyperparameter '" + k + "' for " + algo_);
    }
  }

 private:
  const std::map<std::string, std::string>& raw_;
  std::string algo_;
  std::set<std::string> used_;
};

}  // namespace

TrainOutcome train_and_evaluate(const dataset::Dataset& ds, classifiers::Kind kind,
                                const std::map<std::string, std::string>& params, std::uint64_t seed,
                                double train_fraction, int repeats) {
  using namespace classifiers;
  Params p(params, std::string(kind_name(kind)));
  const auto balanced = dataset::balance(ds, sub_seed(seed, 101));
  const auto parts = dataset::split(balanced, train_fraction, sub_seed(seed, 102));

  TrainOutcome out;
  try {
    switch (kind) {
      case Kind::logreg: {
        LogregConfig c;
        c.epochs = p.integer("epochs", c.epochs);
        c.lr = p.number("lr", c.lr);
        c.seed = seed;
        p.finish();
        out.model = fit_logreg(parts.train, c);
        break;
      }
      case Kind::linear_svm: {
        SvmConfig c;
        c.epochs = p.integer("epochs", c.epochs);
        c.lr = p.number("lr", c.lr);
        c.c_reg = p.number("c_reg", c.c_reg);
        c.seed = seed;
        p.finish();
        out.model = fit_linear_svm(parts.train, c);
        break;
      }
      case Kind::knn: {
        DistanceSpec spec;
        spec.metric = parse_metric(p.text("metric", "euclidean"));
        spec.p = p.number("p", spec.p);
        const int k = p.integer("k", 5);
        p.finish();
        out.model = fit_knn(parts.train, k, spec);
        break;
      }
      case Kind::tree: {
        TreeConfig c;
        c.max_depth = p.integer("max_depth", c.max_depth);
        c.min_leaf = p.integer("min_leaf", c.min_leaf);
        p.finish();
        out.model = fit_tree(parts.train, c);
        break;
      }
      case Kind::gnb:
        p.finish();
        out.model = fit_gnb(parts.train);
        break;
      case Kind::mlp: {
        MlpConfig c;
        const auto hidden = p.text("hidden", "");
        if (!hidden.empty()) {
          c.hidden_layers.clear();
          for (const double w : parse_number_list(hidden)) c.hidden_layers.push_back(static_cast<int>(w));
        }
        c.activation = parse_activation(p.text("activation", std::string(activation_name(c.activation))));
        c.loss = parse_loss(p.text("loss", std::string(loss_name(c.loss))));
        c.dropout_rate = p.number("dropout", c.dropout_rate);
        c.epochs = p.integer("epochs", c.epochs);
        c.batch_size = p.integer("batch_size", c.batch_size);
        c.learning_rate = p.number("learning_rate", c.learning_rate);
        c.momentum = p.number("momentum", c.momentum);
        c.final_lr_fraction = p.number("final_lr_fraction", c.final_lr_fraction);
        c.seed = seed;
        p.finish();
        out.model = fit_mlp(parts.train, c);
        break;
      }
    }
  } catch (const UsageError&) {
    throw;
  } catch (const DomainError& e) {
    // Bad names and out-of-range hyperparameters are input mistakes.
    if (std::string(e.what()).find("unknown") != std::string::npos) throw UsageError(e.what());
    throw;
  }
  out.report = metrics::timed_evaluate(out.model, parts.test, repeats);
  out.n_train = parts.train.size();
  out.n_test = parts.test.size();
  return out;
}

json score_json(const metrics::ScoreReport& r) {
  json per_class = json::object();
  for (const auto label : modal::kLabelOrder) {
    const auto& c = r.per_class[modal::label_index(label)];
    per_class[std::string(modal::label_name(label))] = {
        {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  return json{{"accuracy", r.accuracy},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"averaging", r.averaging == metrics::Averaging::macro ? "macro" : "micro"},
              {"absent_class", r.absent_class},
              {"n_test", r.n_test},
              {"per_class", per_class}};
}

json timing_json(const metrics::ScoreReport& r) {
  return json{{"predict_seconds", r.predict_seconds}, {"n_test", r.n_test}};
}

metrics::BenchConfig bench_config(const RunConfig& cfg) {
  cfg.validate();
  metrics::BenchConfig b;
  b.fractions = cfg.fractions;
  b.hidden_layer_counts = cfg.layer_counts;
  b.hidden_width = cfg.hidden_width;
  b.seed = cfg.seed;
  b.train_fraction = cfg.train_fraction;
  b.repeats = cfg.repeats;
  b.knn_k = cfg.knn_k;
  b.mlp.epochs = cfg.mlp_epochs;
  return b;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto part : detail::split(text, ',')) {
    const auto v = detail::to_double(part);
    if (!v || !std::isfinite(*v)) throw UsageError("malformed number '" + std::string(part) + "' in list '" + text + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace ssstab::pipeline
