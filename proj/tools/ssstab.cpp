#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ssstab/avr.hpp"
#include "ssstab/classifiers.hpp"
#include "ssstab/contingency.hpp"
#include "ssstab/dataset.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/grid.hpp"
#include "ssstab/metrics.hpp"
#include "ssstab/pipeline.hpp"
#include "ssstab/svg.hpp"

namespace fs = std::filesystem;
using namespace ssstab;

namespace {

struct Global {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::optional<std::string> out;
};

pipeline::RunConfig base_config(const Global& g) {
  pipeline::RunConfig cfg;
  if (!g.config.empty()) cfg = pipeline::load_run_config(g.config, cfg);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = *g.out;
  return cfg;
}

fs::path out_dir(const pipeline::RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

// ---- gen-data ----------------------------------------------------------------

struct GenArgs {
  std::optional<std::string> case_path, islanding, source;
  std::optional<std::uint64_t> budget;
  std::optional<std::size_t> per_class;
  std::optional<double> critical, acceptable, good;
  bool no_irrelevant = false;
  bool contingencies = false;
};

void run_gen_data(const Global& g, const GenArgs& a) {
  auto cfg = base_config(g);
  if (a.case_path) cfg.case_path = *a.case_path;
  if (a.budget) cfg.budget = *a.budget;
  if (a.islanding) cfg.islanding = pipeline::parse_islanding(*a.islanding);
  if (a.source) cfg.source = pipeline::parse_source(*a.source);
  if (a.per_class) cfg.synthetic_per_class = *a.per_class;
  if (a.critical) cfg.thresholds.critical_max_pct = *a.critical;
  if (a.acceptable) cfg.thresholds.acceptable_max_pct = *a.acceptable;
  if (a.good) cfg.thresholds.good_max_pct = *a.good;
  if (a.no_irrelevant) cfg.thresholds.irrelevant_is_real_axis = false;
  cfg.validate();
  const auto dir = out_dir(cfg);

  const auto result = pipeline::generate_records(cfg);
  const auto ds = dataset::assemble(result.records);
  dataset::write_csv(dir / "dataset.csv", ds);
  auto report = pipeline::report_json(result.report);
  write_text(dir / "gen_report.json", report.dump(2) + "\n");
  write_text(dir / "run_config.json", pipeline::to_json(cfg).dump(2) + "\n");
  if (a.contingencies && cfg.source == pipeline::DataSource::grid) {
    const auto gc = grid::load_case(pipeline::resolve_case(cfg.case_path));
    const auto scenarios = contingency::sample_contingencies(gc, cfg.budget, cfg.seed);
    std::ofstream out(dir / "contingencies.csv");
    contingency::write_contingency_csv(out, scenarios);
  }

  std::cout << "source " << result.report.source << ", rows " << result.report.rows << "\n";
  if (cfg.source == pipeline::DataSource::grid) {
    std::cout << "scenarios " << result.report.scenarios << " (islanding " << result.report.islanding
              << ", discarded " << result.report.discarded << ")\n";
    for (const auto& [k, n] : result.report.scenarios_per_order) std::cout << "  k=" << k << ": " << n << "\n";
  }
  for (const auto label : modal::kLabelOrder) {
    std::cout << "  " << modal::label_name(label) << ": " << result.report.histogram[modal::label_index(label)] << "\n";
  }
  std::cout << "wrote " << (dir / "dataset.csv").string() << "\n";
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string algorithm;
  std::vector<std::string> params;
  std::optional<double> train_fraction;
  std::optional<int> repeats;
  std::string model_out;
};

void run_train(const Global& g, const TrainArgs& a) {
  auto cfg = base_config(g);
  if (a.train_fraction) cfg.train_fraction = *a.train_fraction;
  if (a.repeats) cfg.repeats = *a.repeats;
  cfg.validate();
  std::map<std::string, std::string> params;
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const auto kind = classifiers::parse_kind(a.algorithm);
  const auto ds = dataset::read_csv(fs::path(a.data));
  const auto dir = out_dir(cfg);
  const auto outcome = pipeline::train_and_evaluate(ds, kind, params, cfg.seed, cfg.train_fraction, cfg.repeats);

  const fs::path model_path = a.model_out.empty() ? dir / ("model_" + a.algorithm + ".json") : fs::path(a.model_out);
  classifiers::save_model(model_path, outcome.model);
  auto report = pipeline::score_json(outcome.report);
  report["algorithm"] = a.algorithm;
  report["n_train"] = outcome.n_train;
  report["seed"] = cfg.seed;
  write_text(dir / ("report_" + a.algorithm + ".json"), report.dump(2) + "\n");
  write_text(dir / ("timing_" + a.algorithm + ".json"), pipeline::timing_json(outcome.report).dump(2) + "\n");

  const auto& r = outcome.report;
  std::cout << "algorithm " << a.algorithm << " (train " << outcome.n_train << ", test " << outcome.n_test << ")\n"
            << "accuracy " << fmt("%.4f", r.accuracy) << "\n"
            << "precision " << fmt("%.4f", r.precision) << "\n"
            << "recall " << fmt("%.4f", r.recall) << "\n"
            << "f1 " << fmt("%.4f", r.f1) << "\n"
            << "predict_seconds " << fmt("%.6f", r.predict_seconds) << "\n"
            << "model " << model_path.string() << "\n";
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
  std::string data;
  std::optional<std::string> fractions, layers;
  std::optional<int> width, epochs, knn_k, repeats;
  bool no_classical = false;
};

void run_bench(const Global& g, const BenchArgs& a) {
  auto cfg = base_config(g);
  if (a.fractions) cfg.fractions = pipeline::parse_number_list(*a.fractions);
  if (a.layers) {
    cfg.layer_counts.clear();
    for (const double v : pipeline::parse_number_list(*a.layers)) cfg.layer_counts.push_back(static_cast<int>(v));
  }
  if (a.width) cfg.hidden_width = *a.width;
  if (a.epochs) cfg.mlp_epochs = *a.epochs;
  if (a.knn_k) cfg.knn_k = *a.knn_k;
  if (a.repeats) cfg.repeats = *a.repeats;
  auto bc = pipeline::bench_config(cfg);
  bc.include_classical = !a.no_classical;
  const auto ds = dataset::read_csv(fs::path(a.data));
  const auto dir = out_dir(cfg);

  const auto rows = metrics::benchmark_sweep(ds, bc, [](const metrics::BenchRow& r) {
    std::cerr << "  fraction " << r.fraction << " " << r.algorithm << " accuracy " << fmt("%.4f", r.report.accuracy)
              << " predict " << fmt("%.4f", r.report.predict_seconds) << " s\n";
  });
  std::ostringstream full, scores;
  metrics::write_sweep_csv(full, rows, true);
  metrics::write_sweep_csv(scores, rows, false);
  write_text(dir / "sweep.csv", full.str());
  write_text(dir / "sweep_scores.csv", scores.str());
  const auto md = metrics::sweep_markdown(rows);
  write_text(dir / "sweep.md", md);
  std::cout << md;
}

// ---- avr ---------------------------------------------------------------------

const std::vector<std::string> kParamNames = {"ka", "ta", "ke", "te", "kg", "tg", "ks", "ts"};

struct AvrArgs {
  std::string controller = "none";
  std::string preset = "nominal";
  std::map<std::string, std::string> param_text;  // raw --ka etc.
  double dt = 1e-4;
  double horizon = 20.0;
  std::size_t stride = 1;
};

avr::AvrParams base_params(const AvrArgs& a) {
  avr::AvrParams p;
  if (a.preset == "max-time-constants") p = avr::max_time_constants(p);
  else if (a.preset != "nominal") throw UsageError("unknown preset '" + a.preset + "'");
  return p;
}

avr::AvrParams scalar_params(const AvrArgs& a) {
  auto p = base_params(a);
  for (const auto& [name, text] : a.param_text) {
    const auto values = pipeline::parse_number_list(text);
    if (values.size() != 1) throw UsageError("--" + name + " takes a single value here");
    p.set(name, values[0]);
  }
  p.validate();
  for (const auto& w : p.range_warnings()) std::cerr << "warning: " << w << "\n";
  return p;
}

/// Fixed parameters plus the one parameter given a list (empty name when none is).
struct SweepSpec {
  avr::AvrParams base;
  std::string param;
  std::vector<double> values;
};

SweepSpec split_sweep(const AvrArgs& a) {
  SweepSpec out{base_params(a), {}, {}};
  for (const auto& [name, text] : a.param_text) {
    const auto v = pipeline::parse_number_list(text);
    if (v.size() > 1 || a.param_text.size() == 1) {
      if (!out.param.empty()) throw UsageError("only one parameter may take a list of values");
      out.param = name;
      out.values = v;
    } else {
      out.base.set(name, v[0]);
    }
  }
  out.base.validate();
  return out;
}

std::vector<avr::Controller> controllers(const std::string& name) {
  if (name == "all") return {avr::Controller::none, avr::Controller::pid, avr::Controller::lqr, avr::Controller::lqg};
  try {
    return {avr::parse_controller(name)};
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::string metrics_json(const avr::StepMetrics& m) {
  nlohmann::json j{{"rise_time_s", m.rise_time_s},       {"settling_time_s", m.settling_time_s},
                   {"peak_time_s", m.peak_time_s},       {"peak", m.peak},
                   {"overshoot_pct", m.overshoot_pct},   {"steady_state_error_pct", m.steady_state_error_pct},
                   {"final_value", m.final_value},       {"flatline", m.flatline}};
  return j.dump(2) + "\n";
}

void run_avr_step(const Global& g, const AvrArgs& a) {
  const auto cfg = base_config(g);
  const auto dir = out_dir(cfg);
  const auto p = scalar_params(a);
  if (a.stride < 1) throw UsageError("--stride must be >= 1");
  const avr::ControllerDesign design;
  const auto gains = avr::design_gains(design);
  std::vector<svg::Series> series;
  for (const auto c : controllers(a.controller)) {
    const auto name = avr::controller_name(c);
    const auto traj = avr::step_response(avr::controlled_system(c, p, design, gains), a.dt, a.horizon);
    std::ostringstream csv;
    csv << "t,y\n";
    for (std::size_t i = 0; i < traj.t.size(); i += a.stride) csv << g17(traj.t[i]) << ',' << g17(traj.y[i]) << '\n';
    write_text(dir / ("step_" + name + ".csv"), csv.str());
    const auto m = avr::step_metrics(traj);
    write_text(dir / ("step_" + name + "_metrics.json"), metrics_json(m));
    std::cout << name << ": rise " << fmt("%.4f", m.rise_time_s) << " s, settling " << fmt("%.4f", m.settling_time_s)
              << " s, peak " << fmt("%.4f", m.peak) << " at " << fmt("%.4f", m.peak_time_s) << " s, overshoot "
              << fmt("%.2f", m.overshoot_pct) << " %, final " << fmt("%.4f", m.final_value) << ", sse "
              << fmt("%.2f", m.steady_state_error_pct) << " %\n";
    series.push_back({name, traj.t, traj.y});
  }
  const auto file = a.controller == "all" ? std::string("step_all.svg") : "step_" + a.controller + ".svg";
  write_text(dir / file, svg::line_plot(series, "AVR step response", "time (s)", "terminal voltage (pu)"));
}

void run_avr_locus(const fs::path& dir, const AvrArgs& a, const SweepSpec& sw) {
  const avr::ControllerDesign design;
  for (const auto c : controllers(a.controller)) {
    const auto name = avr::controller_name(c);
    std::ostringstream csv;
    csv << "param,value,re,im\n";
    for (const double v : sw.values) {
      auto p = sw.base;
      p.set(sw.param, v);
      p.validate();
      for (const auto& e : avr::closed_loop_poles(c, p, design)) {
        csv << sw.param << ',' << g17(v) << ',' << g17(e.sigma) << ',' << g17(e.omega) << '\n';
      }
    }
    const auto file = dir / ("locus_" + name + "_" + sw.param + ".csv");
    write_text(file, csv.str());
    std::cout << name << " pole locus over " << sw.param << " (" << sw.values.size() << " values): " << file.string()
              << "\n";
  }
}

void run_avr_poles(const Global& g, const AvrArgs& a) {
  const auto cfg = base_config(g);
  const auto dir = out_dir(cfg);
  bool has_list = false;
  for (const auto& [name, text] : a.param_text) has_list |= pipeline::parse_number_list(text).size() > 1;
  if (has_list) return run_avr_locus(dir, a, split_sweep(a));
  const auto p = scalar_params(a);
  const avr::ControllerDesign design;
  for (const auto c : controllers(a.controller)) {
    const auto name = avr::controller_name(c);
    std::ostringstream csv;
    csv << "re,im\n";
    std::cout << name << " closed-loop poles:\n";
    for (const auto& e : avr::closed_loop_poles(c, p, design)) {
      csv << g17(e.sigma) << ',' << g17(e.omega) << '\n';
      std::cout << "  " << fmt("%.4f", e.sigma) << (e.omega < 0 ? " - " : " + ") << fmt("%.4f", std::abs(e.omega))
                << "i\n";
    }
    write_text(dir / ("poles_" + name + ".csv"), csv.str());
  }
}

void run_avr_margins(const Global& g, const AvrArgs& a) {
  const auto cfg = base_config(g);
  const auto dir = out_dir(cfg);
  const auto p = scalar_params(a);
  avr::TransferFunction loop;
  if (a.controller == "none") {
    loop = avr::avr_open_loop(p);
  } else if (a.controller == "pid") {
    const avr::PidGains pid;
    loop = avr::series(avr::pid_controller(pid.kp, pid.ki, pid.kd, pid.tau_f), avr::avr_open_loop(p));
  } else {
    throw UsageError("margins support --controller none or pid");
  }
  const auto m = avr::bode_margins(loop);
  std::ostringstream csv;
  csv << "gm_db,pm_deg,pcf,gcf\n" << g17(m.gm_db) << ',' << g17(m.pm_deg) << ',' << g17(m.pcf_rad_s) << ','
      << g17(m.gcf_rad_s) << '\n';
  write_text(dir / ("margins_" + a.controller + ".csv"), csv.str());
  std::cout << "gain margin " << fmt("%.4f", m.gm_db) << " dB at " << fmt("%.4f", m.pcf_rad_s) << " rad/s\n"
            << "phase margin " << fmt("%.4f", m.pm_deg) << " deg at " << fmt("%.4f", m.gcf_rad_s) << " rad/s\n";
}

void run_avr_sweep(const Global& g, const AvrArgs& a) {
  const auto cfg = base_config(g);
  const auto dir = out_dir(cfg);
  auto sw = split_sweep(a);
  if (sw.param.empty()) {
    if (!a.param_text.empty()) throw UsageError("give one parameter a comma-separated list to sweep");
    sw.param = "ka";
    sw.values = {10, 20, 30, 40};
  }
  const auto& base = sw.base;
  const auto& swept = sw.param;
  const auto& values = sw.values;
  const avr::ControllerDesign design;
  for (const auto c : controllers(a.controller)) {
    const auto name = avr::controller_name(c);
    const auto rows = avr::parameter_sweep(c, swept, values, design, base, a.dt, a.horizon);
    std::ostringstream csv;
    csv << "param,value,rise,settle,peak,overshoot,sse\n";
    std::vector<svg::Series> series;
    const avr::DesignedGains gains =
        (c == avr::Controller::lqr || c == avr::Controller::lqg) ? avr::design_gains(design) : avr::DesignedGains{};
    std::cout << name << " sweep over " << swept << ":\n";
    for (const auto& r : rows) {
      csv << r.param << ',' << g17(r.value) << ',';
      if (r.metrics) {
        const auto& m = *r.metrics;
        csv << g17(m.rise_time_s) << ',' << g17(m.settling_time_s) << ',' << g17(m.peak) << ','
            << g17(m.overshoot_pct) << ',' << g17(m.steady_state_error_pct) << '\n';
        std::cout << "  " << swept << "=" << r.value << ": rise " << fmt("%.4f", m.rise_time_s) << " s, settling "
                  << fmt("%.4f", m.settling_time_s) << " s, overshoot " << fmt("%.2f", m.overshoot_pct) << " %\n";
        auto p = base;
        p.set(swept, r.value);
        const auto traj = avr::step_response(avr::controlled_system(c, p, design, gains), a.dt, a.horizon);
        std::ostringstream label;
        label << swept << "=" << r.value;
        series.push_back({label.str(), traj.t, traj.y});
      } else {
        csv << "nan,nan,nan,nan,nan\n";
        std::cout << "  " << swept << "=" << r.value << ": " << r.error << "\n";
      }
    }
    write_text(dir / ("sweep_" + name + "_" + swept + ".csv"), csv.str());
    write_text(dir / ("sweep_" + name + "_" + swept + ".svg"),
               svg::line_plot(series, "AVR step response, " + name + " controller", "time (s)",
                              "terminal voltage (pu)"));
  }
}

// ---- plot --------------------------------------------------------------------

struct PlotArgs {
  std::string data;
  std::string model;
  std::string file = "scatter.svg";
  std::string title;
};

void run_plot(const Global& g, const PlotArgs& a) {
  const auto cfg = base_config(g);
  const auto dir = out_dir(cfg);
  const auto ds = dataset::read_csv(fs::path(a.data));
  std::string text;
  if (a.model.empty()) {
    text = svg::scatter(ds, std::nullopt, a.title.empty() ? "Eigenvalue stability classes" : a.title);
  } else {
    const auto model = classifiers::load_model(a.model);
    const auto pred = classifiers::predict(model, ds.features);
    const auto title = a.title.empty() ? "Predicted classes (" + std::string(classifiers::kind_name(model.kind)) + ")"
                                       : a.title;
    text = svg::scatter(ds, std::span<const modal::StabilityLabel>(pred), title);
  }
  write_text(dir / a.file, text);
  std::cout << "wrote " << (dir / a.file).string() << " (" << ds.size() << " points)\n";
}

void add_avr_options(CLI::App* sub, AvrArgs& a, bool lists) {
  sub->add_option("--controller", a.controller, "none, pid, lqr, lqg or all")->capture_default_str();
  sub->add_option("--preset", a.preset, "nominal or max-time-constants")->capture_default_str();
  for (const auto& name : kParamNames) {
    sub->add_option_function<std::string>(
        "--" + name, [&a, name](const std::string& v) { a.param_text[name] = v; },
        lists ? "value or comma-separated list to sweep" : "parameter override");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-signal stability lab: eigenvalue datasets, classifiers and the AVR controller study"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (default out)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "sample contingencies and write the labelled eigenvalue dataset");
  gen_cmd->add_option("--case", gen.case_path, "case CSV path or bundled case name");
  gen_cmd->add_option("--budget", gen.budget, "total contingency budget");
  gen_cmd->add_option("--source", gen.source, "grid or synthetic")->check(CLI::IsMember({"grid", "synthetic"}));
  gen_cmd->add_option("--per-class", gen.per_class, "rows per class for the synthetic source");
  gen_cmd->add_option("--islanding", gen.islanding, "discard or label-unstable")
      ->check(CLI::IsMember({"discard", "label-unstable"}));
  gen_cmd->add_option("--critical-max", gen.critical, "critical/acceptable cut, percent");
  gen_cmd->add_option("--acceptable-max", gen.acceptable, "acceptable/good cut, percent");
  gen_cmd->add_option("--good-max", gen.good, "good/satisfactory cut, percent");
  gen_cmd->add_flag("--no-irrelevant", gen.no_irrelevant, "label real-axis modes by damping like the rest");
  gen_cmd->add_flag("--contingencies", gen.contingencies, "also write contingencies.csv");
  gen_cmd->callback([&] { run_gen_data(g, gen); });

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "balance, split, fit one classifier and evaluate it");
  train_cmd->add_option("--data", tr.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--algorithm", tr.algorithm, "logreg, linear_svm, knn, tree, gnb or mlp")
      ->required()
      ->check(CLI::IsMember({"logreg", "linear_svm", "knn", "tree", "gnb", "mlp"}));
  train_cmd->add_option("--param", tr.params, "hyperparameter key=value (repeatable)");
  train_cmd->add_option("--train-fraction", tr.train_fraction, "train share of the balanced data");
  train_cmd->add_option("--repeats", tr.repeats, "timing repeats");
  train_cmd->add_option("--model-out", tr.model_out, "model file (default <out>/model_<algorithm>.json)");
  train_cmd->callback([&] { run_train(g, tr); });

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "benchmark sweep over data sizes and MLP depths");
  bench_cmd->add_option("--data", be.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--fractions", be.fractions, "comma-separated data fractions");
  bench_cmd->add_option("--layers", be.layers, "comma-separated hidden-layer counts");
  bench_cmd->add_option("--width", be.width, "hidden layer width");
  bench_cmd->add_option("--epochs", be.epochs, "MLP epochs");
  bench_cmd->add_option("--knn-k", be.knn_k, "k for k-NN");
  bench_cmd->add_option("--repeats", be.repeats, "timing repeats");
  bench_cmd->add_flag("--no-classical", be.no_classical, "only run the MLP variants");
  bench_cmd->callback([&] { run_bench(g, be); });

  auto* avr_cmd = app.add_subcommand("avr", "AVR controller study");
  avr_cmd->require_subcommand(1);
  AvrArgs step_a, poles_a, margins_a, sweep_a;
  auto* step_cmd = avr_cmd->add_subcommand("step", "step response, metrics and plot");
  add_avr_options(step_cmd, step_a, false);
  step_cmd->add_option("--dt", step_a.dt, "integration step (s)")->capture_default_str();
  step_cmd->add_option("--horizon", step_a.horizon, "simulated time (s)")->capture_default_str();
  step_cmd->add_option("--stride", step_a.stride, "write every n-th sample")->capture_default_str();
  step_cmd->callback([&] { run_avr_step(g, step_a); });
  auto* poles_cmd =
      avr_cmd->add_subcommand("poles", "closed-loop poles; a list-valued parameter gives the pole locus");
  add_avr_options(poles_cmd, poles_a, true);
  poles_cmd->callback([&] { run_avr_poles(g, poles_a); });
  auto* margins_cmd = avr_cmd->add_subcommand("margins", "gain and phase margins of the loop");
  add_avr_options(margins_cmd, margins_a, false);
  margins_cmd->callback([&] { run_avr_margins(g, margins_a); });
  auto* sweep_cmd = avr_cmd->add_subcommand("sweep", "step metrics over a parameter grid (default ka 10,20,30,40)");
  add_avr_options(sweep_cmd, sweep_a, true);
  sweep_cmd->add_option("--dt", sweep_a.dt, "integration step (s)")->capture_default_str();
  sweep_cmd->add_option("--horizon", sweep_a.horizon, "simulated time (s)")->capture_default_str();
  sweep_cmd->callback([&] { run_avr_sweep(g, sweep_a); });

  PlotArgs pl;
  auto* plot_cmd = app.add_subcommand("plot", "unit-circle scatter of a dataset");
  plot_cmd->add_option("--data", pl.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--model", pl.model, "colour by this model's predictions")->check(CLI::ExistingFile);
  plot_cmd->add_option("--file", pl.file, "output file name inside --out")->capture_default_str();
  plot_cmd->add_option("--title", pl.title, "figure title");
  plot_cmd->callback([&] { run_plot(g, pl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
