#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "ssstab/avr.hpp"
#include "ssstab/classifiers.hpp"
#include "ssstab/contingency.hpp"
#include "ssstab/dataset.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/grid.hpp"
#include "ssstab/metrics.hpp"
#include "ssstab/modal.hpp"
#include "ssstab/pipeline.hpp"

namespace py = pybind11;
using namespace ssstab;

namespace {

py::int_ big(const contingency::BigInt& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.str().c_str(), nullptr, 10));
}

std::vector<std::complex<double>> to_complex(const std::vector<modal::ComplexEigenvalue>& eigs) {
  std::vector<std::complex<double>> out;
  for (const auto& e : eigs) out.push_back(e.value());
  return out;
}

modal::ComplexEigenvalue from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }

dataset::Dataset make_dataset(const Eigen::MatrixXd& features, const std::vector<std::string>& labels) {
  dataset::Dataset ds;
  ds.features = features;
  for (const auto& l : labels) ds.labels.push_back(modal::parse_label(l));
  ds.zeta_pct.assign(labels.size(), 0.0);
  ds.scenario_id.assign(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ds.zeta_pct[i] = modal::damping_ratio({features(static_cast<Eigen::Index>(i), 0), features(static_cast<Eigen::Index>(i), 1)});
  }
  ds.validate();
  return ds;
}

std::vector<std::string> label_names(const std::vector<modal::StabilityLabel>& labels) {
  std::vector<std::string> out;
  for (const auto l : labels) out.emplace_back(modal::label_name(l));
  return out;
}

avr::AvrParams avr_params(const std::map<std::string, double>& overrides) {
  avr::AvrParams p;
  for (const auto& [k, v] : overrides) p.set(k, v);
  p.validate();
  return p;
}

py::dict metrics_dict(const avr::StepMetrics& m) {
  py::dict d;
  d["rise_time_s"] = m.rise_time_s;
  d["settling_time_s"] = m.settling_time_s;
  d["peak_time_s"] = m.peak_time_s;
  d["peak"] = m.peak;
  d["overshoot_pct"] = m.overshoot_pct;
  d["steady_state_error_pct"] = m.steady_state_error_pct;
  d["final_value"] = m.final_value;
  d["flatline"] = m.flatline;
  return d;
}

py::dict scores_dict(const metrics::ScoreReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["predict_seconds"] = r.predict_seconds;
  d["n_test"] = r.n_test;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Small-signal stability lab: contingencies, eigenvalue labels, classifiers and the AVR study";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  // contingency
  m.def("count_combinations", [](std::int64_t n, std::int64_t k) { return big(contingency::count_combinations(n, k)); });
  m.def("total_scenarios", [](std::int64_t n) { return big(contingency::total_scenarios(n)); });
  m.def("poisson_pmf", &contingency::poisson_pmf, py::arg("lam"), py::arg("r"));
  m.def("order_weights", &contingency::order_weights, py::arg("n"));
  m.def(
      "sample_contingencies",
      [](std::size_t n, std::uint64_t budget, std::uint64_t seed) {
        std::vector<std::vector<std::size_t>> out;
        for (const auto& c : contingency::sample_contingencies(n, budget, seed)) out.push_back(c.opened);
        return out;
      },
      py::arg("n_branches"), py::arg("budget"), py::arg("seed"));
  m.def(
      "mc_estimate",
      [](const std::vector<int>& x) {
        const auto e = contingency::mc_estimate(x);
        py::dict d;
        d["q_bar"] = e.q_bar;
        d["sample_variance"] = e.sample_variance;
        d["estimator_variance"] = e.estimator_variance;
        d["alpha"] = e.alpha;
        d["n"] = e.n;
        return d;
      },
      py::arg("indicators"));
  m.def("required_samples", &contingency::required_samples, py::arg("alpha"), py::arg("q_bar"));

  // grid
  m.def(
      "system_matrix",
      [](const std::string& case_path, const std::vector<std::size_t>& opened) {
        const auto gc = grid::load_case(pipeline::resolve_case(case_path));
        return grid::linearize_classical(gc, contingency::Contingency(opened)).a;
      },
      py::arg("case_path") = "ieee14_standard.csv", py::arg("opened") = std::vector<std::size_t>{});

  // modal
  m.def("eigenvalues", [](const Eigen::MatrixXd& a) { return to_complex(modal::eigenvalues(a)); }, py::arg("a"));
  m.def("damping_ratio", [](std::complex<double> z) { return modal::damping_ratio(from_complex(z)); });
  m.def("normalize", [](std::complex<double> z) { return modal::normalize(from_complex(z)).value(); });
  m.def(
      "classify",
      [](std::complex<double> z) { return std::string(modal::label_name(modal::classify(from_complex(z)))); },
      py::arg("eig"));
  m.attr("LABELS") = [] {
    std::vector<std::string> out;
    for (const auto l : modal::kLabelOrder) out.emplace_back(modal::label_name(l));
    return out;
  }();

  // datasets
  m.def(
      "generate_dataset",
      [](const std::string& source, std::uint64_t budget, std::uint64_t seed, std::size_t per_class,
         const std::string& case_path) {
        pipeline::RunConfig cfg;
        cfg.source = pipeline::parse_source(source);
        cfg.budget = budget;
        cfg.seed = seed;
        cfg.synthetic_per_class = per_class;
        cfg.case_path = case_path;
        const auto ds = dataset::assemble(pipeline::generate_records(cfg).records);
        return py::make_tuple(ds.features, label_names(ds.labels));
      },
      py::arg("source") = "grid", py::arg("budget") = 20000, py::arg("seed") = 0, py::arg("per_class") = 3400,
      py::arg("case_path") = "ieee14_standard.csv");

  // classifiers
  py::class_<classifiers::ClassifierModel>(m, "Model")
      .def_property_readonly("kind", [](const classifiers::ClassifierModel& mo) { return std::string(classifiers::kind_name(mo.kind)); })
      .def("predict", [](const classifiers::ClassifierModel& mo, const Eigen::MatrixXd& x) {
        return label_names(classifiers::predict(mo, x));
      })
      .def("to_json", [](const classifiers::ClassifierModel& mo) { return classifiers::to_json(mo); })
      .def_static("from_json", [](const std::string& s) { return classifiers::from_json(s); });
  m.def(
      "train",
      [](const Eigen::MatrixXd& features, const std::vector<std::string>& labels, const std::string& algorithm,
         const std::map<std::string, std::string>& params, std::uint64_t seed) {
        const auto out = pipeline::train_and_evaluate(make_dataset(features, labels),
                                                      classifiers::parse_kind(algorithm), params, seed);
        return py::make_tuple(out.model, scores_dict(out.report));
      },
      py::arg("features"), py::arg("labels"), py::arg("algorithm"),
      py::arg("params") = std::map<std::string, std::string>{}, py::arg("seed") = 0);

  // avr
  m.def(
      "avr_closed_loop",
      [](const std::map<std::string, double>& p) {
        const auto tf = avr::avr_closed_loop(avr_params(p));
        return py::make_tuple(tf.num, tf.den);
      },
      py::arg("params") = std::map<std::string, double>{});
  m.def(
      "avr_poles",
      [](const std::string& controller, const std::map<std::string, double>& p) {
        return to_complex(avr::closed_loop_poles(avr::parse_controller(controller), avr_params(p), {}));
      },
      py::arg("controller") = "none", py::arg("params") = std::map<std::string, double>{});
  m.def(
      "avr_step",
      [](const std::string& controller, const std::map<std::string, double>& p, double dt, double horizon) {
        const auto traj =
            avr::step_response(avr::controlled_system(avr::parse_controller(controller), avr_params(p)), dt, horizon);
        return py::make_tuple(traj.t, traj.y, metrics_dict(avr::step_metrics(traj)));
      },
      py::arg("controller") = "none", py::arg("params") = std::map<std::string, double>{}, py::arg("dt") = 1e-4,
      py::arg("horizon") = 20.0);
  m.def(
      "bode_margins",
      [](const std::vector<double>& num, const std::vector<double>& den) {
        const auto mg = avr::bode_margins({num, den});
        py::dict d;
        d["gm_db"] = mg.gm_db;
        d["pm_deg"] = mg.pm_deg;
        d["pcf_rad_s"] = mg.pcf_rad_s;
        d["gcf_rad_s"] = mg.gcf_rad_s;
        return d;
      },
      py::arg("num"), py::arg("den"));
  m.def("two_bus_voltage", &avr::two_bus_voltage, py::arg("p"), py::arg("q"));
}
