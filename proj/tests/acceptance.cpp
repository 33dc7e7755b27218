// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssstab/avr.hpp"
#include "ssstab/classifiers.hpp"
#include "ssstab/contingency.hpp"
#include "ssstab/dataset.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/metrics.hpp"
#include "ssstab/modal.hpp"
#include "ssstab/rng.hpp"

namespace fs = std::filesystem;
using namespace ssstab;
using modal::StabilityLabel;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------

void combinatorics(Outcome& o) {
  const auto t0 = Clock::now();
  o.require(contingency::total_scenarios(20) == 1048574, "total_scenarios(20) == 1048574");
  const auto pascal = oracle::pascal(25);
  std::size_t mismatches = 0;
  for (int n = 0; n <= 25; ++n) {
    for (int k = 0; k <= n; ++k) {
      mismatches += contingency::count_combinations(n, k) != pascal[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }
  }
  const double dt = seconds_since(t0);
  o.require(mismatches == 0, "Pascal agreement");
  o.require(dt < 1.0, "runtime < 1 s");
  o.detail << "total_scenarios(20)=" << contingency::total_scenarios(20) << ", pascal mismatches " << mismatches
           << ", " << fmt(dt, 3) << " s";
}

// ---- 2 ---------------------------------------------------------------------

void eigen_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(1000 + static_cast<std::uint64_t>(i));
    const Eigen::Index n = 2 + i % 9;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = rng.normal();
    std::vector<std::complex<double>> ours;
    for (const auto& e : modal::eigenvalues(a)) ours.push_back(e.value());
    worst = std::max(worst, oracle::matched_max_error(ours, oracle::eigen_via_char_poly(a)));
  }
  const double dt = seconds_since(t0);
  o.require(worst <= 1e-8, "max matched error <= 1e-8");
  o.require(dt < 10.0, "runtime < 10 s");
  o.detail << "200 matrices, max matched error " << worst << ", " << fmt(dt, 3) << " s";
}

// ---- 3 ---------------------------------------------------------------------

void damping_invariants(Outcome& o) {
  Rng rng(3);
  double worst = 0.0;
  std::size_t label_changes = 0, checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const double r = std::pow(10.0, rng.uniform(-3, 3));
    const double th = rng.uniform(-M_PI, M_PI);
    modal::ComplexEigenvalue e{r * std::cos(th), r * std::sin(th)};
    if (i % 100 == 0) e.omega = 0.0;
    const auto n = modal::normalize(e);
    worst = std::max(worst, std::abs(modal::damping_ratio(n) - modal::damping_ratio(e)));
    if (e.omega != 0.0) {
      ++checked;
      label_changes += modal::classify(n) != modal::classify(e);
    }
  }
  o.require(worst <= 1e-10, "damping invariance <= 1e-10");
  o.require(label_changes == 0, "classify invariance");
  o.detail << "1e5 eigenvalues, max damping change " << worst << " %, label changes " << label_changes << " of "
           << checked;
}

// ---- 4 ---------------------------------------------------------------------

void monte_carlo(Outcome& o) {
  Rng rng(4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<std::size_t>(1 + rng.below(2000));
    const double q = rng.uniform();
    std::vector<int> x(n);
    for (auto& v : x) v = rng.uniform() < q ? 1 : 0;
    const auto e = contingency::mc_estimate(x);
    // Population variance of the indicators, summed directly.
    long double mean = 0, var = 0;
    for (const int v : x) mean += v;
    mean /= static_cast<long double>(n);
    for (const int v : x) var += (v - mean) * (v - mean);
    var /= static_cast<long double>(n);
    worst = std::max({worst, std::abs(e.sample_variance - (e.q_bar - e.q_bar * e.q_bar)),
                      std::abs(static_cast<double>(var) - e.sample_variance)});
  }
  const auto ns = contingency::required_samples(0.05, 0.1);
  int covered = 0;
  const double sd = std::sqrt(0.1 * 0.9 / 1e5);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    std::vector<int> x(100000);
    for (auto& v : x) v = r.uniform() < 0.1 ? 1 : 0;
    covered += std::abs(contingency::mc_estimate(x).q_bar - 0.1) <= 3 * sd;
  }
  o.require(worst <= 1e-12, "variance identity <= 1e-12");
  o.require(ns == 3600, "required_samples(0.05, 0.1) == 3600");
  o.require(covered >= 95, ">= 95 of 100 seeds within 3 sd");
  o.detail << "identity error " << worst << ", required_samples " << ns << ", " << covered << "/100 within 3 sd";
}

// ---- 5 ---------------------------------------------------------------------

void avr_pinned(Outcome& o) {
  const auto t0 = Clock::now();
  const avr::AvrParams p;
  const auto cl = avr::avr_closed_loop(p);
  const double dc = cl.dc_gain();
  const auto traj = avr::step_response(avr::tf_to_ss(cl), 1e-4, 20.0);
  const double final_value = avr::step_metrics(traj).final_value;
  bool window = false;
  std::ostringstream pair;
  for (const auto& e : avr::poles(cl)) {
    if (e.sigma >= -0.7 && e.sigma <= -0.4 && std::abs(e.omega) >= 4.2 && std::abs(e.omega) <= 5.0) {
      window = true;
      pair.str("");
      pair << fmt(e.sigma) << " +/- " << fmt(std::abs(e.omega)) << "j";
    }
  }
  const double dt = seconds_since(t0);
  o.require(std::abs(dc - 10.0 / 11.0) <= 1e-12, "DC gain 10/11");
  o.require(std::abs(final_value - dc) <= 1e-3, "simulated final value within 1e-3");
  o.require(window, "dominant pair in window");
  o.require(dt < 5.0, "runtime < 5 s");
  o.detail << "DC gain " << fmt(dc, 5) << ", final value " << fmt(final_value, 5) << ", pair " << pair.str() << ", "
           << fmt(dt, 3) << " s";
}

// ---- 6 ---------------------------------------------------------------------

std::vector<std::complex<double>> eig(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

void controller_study(Outcome& o) {
  using avr::Controller;
  const avr::ControllerDesign design;
  const auto gains = avr::design_gains(design);
  avr::AvrParams ks2;
  ks2.ks = 2.0;
  auto metrics = [&](Controller c, const avr::AvrParams& p) {
    return avr::step_metrics(avr::step_response(avr::controlled_system(c, p, design, gains), 1e-4, 20.0));
  };
  const auto pid = metrics(Controller::pid, {}), lqr = metrics(Controller::lqr, {}), lqg = metrics(Controller::lqg, {});
  const auto pid2 = metrics(Controller::pid, ks2), lqr2 = metrics(Controller::lqr, ks2),
             lqg2 = metrics(Controller::lqg, ks2);
  const double f_pid = pid2.settling_time_s / pid.settling_time_s;
  const double f_lqr = lqr2.settling_time_s / lqr.settling_time_s;
  const double f_lqg = lqg2.settling_time_s / lqg.settling_time_s;

  const auto plant = avr::avr_plant({});
  const auto lqg_sys = avr::lqg_closed_loop(plant, gains.lqg_regulator.k, gains.kalman, gains.lqg_nbar);
  auto expected = eig(plant.a - plant.b * gains.lqg_regulator.k);
  for (const auto& e : eig(plant.a - gains.kalman * plant.c)) expected.push_back(e);
  const double separation = oracle::matched_max_error(eig(lqg_sys.a), expected);
  const double residual = std::max({gains.lqr.residual, gains.lqg_regulator.residual, gains.kalman_dual.residual});

  o.require(lqg.settling_time_s < lqr.settling_time_s && lqr.settling_time_s < pid.settling_time_s,
            "settling LQG < LQR < PID");
  o.require(lqg.overshoot_pct <= lqr.overshoot_pct && lqr.overshoot_pct < pid.overshoot_pct,
            "overshoot LQG <= LQR < PID");
  o.require(f_pid > f_lqr && f_pid > f_lqg, "K_S = 2 degrades PID most");
  o.require(residual <= avr::kAreTolerance, "ARE residuals <= 1e-9");
  o.require(separation <= 1e-6, "separation union <= 1e-6");
  o.detail << "settling PID/LQR/LQG " << fmt(pid.settling_time_s) << "/" << fmt(lqr.settling_time_s) << "/"
           << fmt(lqg.settling_time_s) << " s, overshoot " << fmt(pid.overshoot_pct, 2) << "/"
           << fmt(lqr.overshoot_pct, 2) << "/" << fmt(lqg.overshoot_pct, 2) << " %, K_S=2 factors " << fmt(f_pid, 3)
           << "/" << fmt(f_lqr, 3) << "/" << fmt(f_lqg, 3) << ", ARE residual " << residual << ", separation "
           << separation;
}

// ---- 7 ---------------------------------------------------------------------

dataset::Dataset sector_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  dataset::Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0, 2 * M_PI), r = std::sqrt(rng.uniform());
    ds.features(static_cast<Eigen::Index>(i), 0) = r * std::cos(a);
    ds.features(static_cast<Eigen::Index>(i), 1) = r * std::sin(a);
    ds.labels.push_back(modal::label_from_index(static_cast<std::size_t>(a / (2 * M_PI) * 6) % 6));
    ds.zeta_pct.push_back(0.0);
    ds.scenario_id.push_back(static_cast<std::int64_t>(i));
  }
  return ds;
}

void mlp_correctness(Outcome& o) {
  using namespace classifiers;
  Rng rng(7);
  Eigen::MatrixXd x(10, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1, 1);
  std::vector<StabilityLabel> y;
  for (int i = 0; i < 10; ++i) y.push_back(modal::label_from_index(static_cast<std::size_t>(i % 6)));
  const auto oh = dataset::encode_one_hot(y);
  const std::vector<int> hidden{8, 6};
  double worst = 0.0;
  for (const auto act : {Activation::relu, Activation::selu, Activation::sigmoid}) {
    auto params = mlp_init(2, hidden, 6, act, 11);
    const auto g = mlp_gradient(params, x, oh, Loss::cross_entropy);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      auto check = [&](double& w, double analytic) {
        const double keep = w;
        const double fd = oracle::central_difference(
            [&](double t) {
              w = t;
              return mlp_loss(params, x, oh, Loss::cross_entropy);
            },
            keep, 1e-5);
        w = keep;
        worst = std::max(worst, std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-3}));
      };
      for (Eigen::Index i = 0; i < params.layers[l].w.size(); ++i) check(params.layers[l].w(i), g.dw[l](i));
      for (Eigen::Index i = 0; i < params.layers[l].b.size(); ++i) check(params.layers[l].b(i), g.db[l](i));
    }
  }

  Eigen::MatrixXd z(1000, 6);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = 50 * rng.normal();
  const auto s = softmax_rows(z);
  double row_error = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) row_error = std::max(row_error, std::abs(s.row(i).sum() - 1.0));

  const auto tiny = sector_data(20, 8);
  MlpConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.epochs = 2000;
  cfg.batch_size = 20;
  cfg.seed = 3;
  std::vector<double> trace;
  fit_mlp(tiny, cfg, &trace);
  std::size_t reached = 0;
  while (reached < trace.size() && trace[reached] >= 0.05) ++reached;

  o.require(worst <= 1e-4, "gradient relative error <= 1e-4");
  o.require(row_error <= 1e-12, "softmax rows sum to 1");
  o.require(reached < trace.size(), "memorization loss < 0.05 within 2000 epochs");
  o.detail << "max gradient rel. error " << worst << ", softmax row error " << row_error << ", loss < 0.05 at epoch "
           << reached + 1;
}

// ---- 8 and 9 ---------------------------------------------------------------

struct Trained {
  std::string name;
  metrics::ScoreReport report;
  double fit_seconds = 0.0;
};

void classifier_trends(Outcome& o8, Outcome& o9) {
  using namespace classifiers;
  const auto t0 = Clock::now();
  dataset::SyntheticConfig sc;
  sc.per_class = 3400;
  const auto balanced = dataset::balance(dataset::assemble(dataset::synthetic_records(sc, 8)), 81);
  const auto parts = dataset::split(balanced, 0.75, 82);

  std::vector<Trained> results;
  auto run = [&](const std::string& name, const std::function<ClassifierModel()>& fit) {
    const auto f0 = Clock::now();
    const auto model = fit();
    const double fit_s = seconds_since(f0);
    results.push_back({name, metrics::timed_evaluate(model, parts.test, 3), fit_s});
    std::cerr << "  " << name << ": accuracy " << fmt(results.back().report.accuracy) << ", f1 "
              << fmt(results.back().report.f1) << ", fit " << fmt(fit_s, 2) << " s, predict "
              << fmt(results.back().report.predict_seconds, 4) << " s\n";
    return results.back().report;
  };
  const auto knn = run("knn", [&] { return fit_knn(parts.train, 5); });
  const auto tree = run("tree", [&] { return fit_tree(parts.train); });
  const auto lr = run("logreg", [&] { return fit_logreg(parts.train, {500, 0.5, 83}); });
  const auto svm = run("linear_svm", [&] { return fit_linear_svm(parts.train, {30, 0.01, 100.0, 84}); });
  std::map<int, metrics::ScoreReport> mlp;
  for (const int h : {2, 3, 5, 7, 10}) {
    MlpConfig cfg;
    cfg.hidden_layers.assign(static_cast<std::size_t>(h), 100);
    cfg.seed = 90 + static_cast<std::uint64_t>(h);
    mlp[h] = run("mlp" + std::to_string(h), [&] { return fit_mlp(parts.train, cfg); });
  }
  const double dt = seconds_since(t0);

  double deep_excess = -1.0;
  for (const int h : {5, 7, 10}) deep_excess = std::max(deep_excess, mlp[h].f1 - mlp[2].f1);

  o8.require(balanced.size() >= 20000, ">= 20k balanced rows");
  o8.require(knn.accuracy >= 0.99, "knn >= 99 %");
  o8.require(tree.accuracy >= 0.97, "tree >= 97 %");
  o8.require(knn.accuracy - lr.accuracy >= 0.05, "logreg trails knn by >= 5 points");
  o8.require(knn.accuracy - svm.accuracy >= 0.05, "svm trails knn by >= 5 points");
  o8.require(mlp[2].accuracy >= 0.97, "mlp2 >= 97 %");
  o8.require(std::abs(mlp[2].accuracy - mlp[3].accuracy) <= 0.01, "mlp2 within 1 point of mlp3");
  o8.require(deep_excess <= 0.005, "deep MLPs do not beat mlp2 F1 by > 0.5 points");
  o8.require(dt < 600.0, "runtime < 10 min");
  o8.detail << balanced.size() << " rows (" << parts.train.size() << "/" << parts.test.size() << "), knn "
            << fmt(knn.accuracy) << ", tree " << fmt(tree.accuracy) << ", logreg " << fmt(lr.accuracy) << ", svm "
            << fmt(svm.accuracy) << ", mlp2/3 " << fmt(mlp[2].accuracy) << "/" << fmt(mlp[3].accuracy)
            << ", deep F1 excess " << fmt(deep_excess) << ", " << fmt(dt, 1) << " s";

  const double ratio = mlp[2].predict_seconds / knn.predict_seconds;
  o9.require(ratio <= 0.1, "mlp predict <= 0.1 x knn predict");
  o9.detail << "test " << parts.test.size() << ", train " << parts.train.size() << ": mlp "
            << fmt(mlp[2].predict_seconds, 4) << " s, knn " << fmt(knn.predict_seconds, 4) << " s, ratio "
            << fmt(ratio, 4);
}

// ---- 10 --------------------------------------------------------------------

void metric_examples(Outcome& o) {
  const auto b = metrics::binary_scores(9, 1, 2);
  std::vector<StabilityLabel> y;
  for (std::size_t c = 0; c < 6; ++c) y.insert(y.end(), 100, modal::label_from_index(c));
  const auto perfect = metrics::scores(metrics::confusion(y, y));
  const std::vector<StabilityLabel> constant(y.size(), StabilityLabel::good);
  const auto flat = metrics::scores(metrics::confusion(y, constant));
  o.require(std::abs(b.precision - 0.9) <= 1e-5 && std::abs(b.recall - 0.81818) <= 1e-5 &&
                std::abs(b.f1 - 0.85714) <= 1e-5,
            "binary example");
  o.require(perfect.accuracy == 1.0, "perfect accuracy 1");
  o.require(std::abs(flat.accuracy - 1.0 / 6) <= 1e-12, "constant accuracy 1/6");
  o.detail << "precision " << fmt(b.precision, 5) << ", recall " << fmt(b.recall, 5) << ", f1 " << fmt(b.f1, 5)
           << ", perfect " << fmt(perfect.accuracy) << ", constant " << fmt(flat.accuracy, 5);
}

// ---- 11 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool timing_file(const std::string& name) {
  return name.rfind("timing_", 0) == 0 || name == "sweep.csv" || name == "sweep.md";
}

void determinism(Outcome& o) {
  const fs::path work = fs::path(SSSTAB_WORK_DIR) / "determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path run = work / "run";
  const std::string cli = std::string("\"") + SSSTAB_CLI_PATH + "\" --seed 5 --out \"" + run.string() + "\" ";
  const std::string quiet = " > \"" + (work / "log.txt").string() + "\" 2>&1";
  const std::vector<std::string> steps{
      "gen-data --contingencies",
      "gen-data --source synthetic --per-class 300",
      "train --data \"" + (run / "dataset.csv").string() + "\" --algorithm knn",
      "train --data \"" + (run / "dataset.csv").string() + "\" --algorithm mlp --param hidden=32,32 --param epochs=5",
      "bench --data \"" + (run / "dataset.csv").string() + "\" --fractions 0.5,1 --layers 1,2 --width 16 --epochs 3 --repeats 1",
  };
  // The grid gen-data run gets its own directory.
  const fs::path grid_run = work / "grid";
  const std::string grid_cli =
      std::string("\"") + SSSTAB_CLI_PATH + "\" --seed 5 --out \"" + grid_run.string() + "\" " + steps[0] + quiet;

  std::vector<std::string> failures;
  for (int round = 1; round <= 2; ++round) {
    if (std::system(grid_cli.c_str()) != 0) failures.push_back("grid gen-data round " + std::to_string(round));
    for (std::size_t s = 1; s < steps.size(); ++s) {
      const auto cmd = cli + steps[s] + quiet;
      if (std::system(cmd.c_str()) != 0) failures.push_back(steps[s].substr(0, steps[s].find(' ')) + " round " +
                                                            std::to_string(round));
    }
    fs::rename(run, work / ("run" + std::to_string(round)));
    fs::rename(grid_run, work / ("grid" + std::to_string(round)));
  }

  std::size_t compared = 0, differing = 0;
  for (const auto* name : {"run", "grid"}) {
    for (const auto& entry : fs::directory_iterator(work / (std::string(name) + "1"))) {
      const auto file = entry.path().filename().string();
      if (timing_file(file)) continue;
      ++compared;
      const auto other = work / (std::string(name) + "2") / file;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        ++differing;
        failures.push_back(std::string(name) + "/" + file + " differs");
      }
    }
  }
  o.require(failures.empty(), "identical outputs and clean exits");
  o.require(compared >= 10, "all expected outputs present");
  o.detail << compared << " non-timing files compared, " << differing << " differ";
  for (const auto& f : failures) o.detail << "; " << f;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<void(Outcome&)> run;
  };
  Outcome c8, c9;
  bool trends_done = false;
  auto trends = [&] {
    if (trends_done) return;
    trends_done = true;
    try {
      classifier_trends(c8, c9);
    } catch (const std::exception& e) {
      c8.require(false, std::string("exception: ") + e.what());
      c9.require(false, "classifier run failed");
    }
  };
  const std::vector<Criterion> criteria{
      {1, "combinatorics", combinatorics},
      {2, "eigenvalue oracle", eigen_oracle},
      {3, "damping and normalization invariants", damping_invariants},
      {4, "Monte Carlo algebra", monte_carlo},
      {5, "AVR pinned values", avr_pinned},
      {6, "controller study", controller_study},
      {7, "MLP correctness", mlp_correctness},
      {8, "classifier trends",
       [&](Outcome& o) {
         trends();
         o.pass = c8.pass;
         o.detail << c8.detail.str();
       }},
      {9, "prediction timing ratio",
       [&](Outcome& o) {
         trends();
         o.pass = c9.pass;
         o.detail << c9.detail.str();
       }},
      {10, "metrics", metric_examples},
      {11, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail.str() << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
