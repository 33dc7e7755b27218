#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "oracles.hpp"
#include "ssstab/avr.hpp"
#include "ssstab/errors.hpp"

using namespace ssstab;
using namespace ssstab::avr;

namespace {

std::vector<std::complex<double>> as_complex(const std::vector<ComplexEigenvalue>& v) {
  std::vector<std::complex<double>> out;
  for (const auto& e : v) out.push_back(e.value());
  return out;
}

std::vector<std::complex<double>> eig(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

double max_abs_diff(const Trajectory& a, const Trajectory& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.y.size(); ++i) m = std::max(m, std::abs(a.y[i] - b.y[i]));
  return m;
}

double max_abs(const Trajectory& a) {
  double m = 0;
  for (const double v : a.y) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("polynomials and transfer functions") {
  CHECK(poly_mul({1, 1}, {2, 1}) == Poly{2, 3, 1});
  CHECK(poly_add({1}, {0, 2}) == Poly{1, 2});
  CHECK(poly_degree({1, 2, 0}) == 1);
  const std::vector<ComplexEigenvalue> roots{{-1, 2}, {-1, -2}};
  const auto p = poly_from_roots(roots, 2.0);
  CHECK(p[0] == doctest::Approx(10));
  CHECK(p[1] == doctest::Approx(4));
  CHECK(p[2] == doctest::Approx(2));
  CHECK_THROWS_AS((TransferFunction{{1}, {0}}.validate()), DomainError);
  const TransferFunction g{{1}, {1, 1}};
  CHECK(feedback(g, {{1}, {1}}).dc_gain() == doctest::Approx(0.5));
  const auto cancelled = minreal(TransferFunction{{1, 1}, {2, 3, 1}});
  CHECK(poly_degree(cancelled.den) == 1);
  CHECK(cancelled.eval({0, 1.3}).real() == doctest::Approx((1.0 / std::complex<double>(2, 1.3)).real()));
}

TEST_CASE("AVR transfer functions") {
  const AvrParams nominal;
  const auto cl = avr_closed_loop(nominal);
  CHECK(cl.dc_gain() == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
  CHECK(poly_degree(cl.den) == 4);
  AvrParams zero = nominal;
  zero.ka = 0.0;
  for (const double c : avr_closed_loop(zero).num) CHECK(c == 0.0);

  const auto ol = avr_open_loop(nominal);
  CHECK(ol.dc_gain() == doctest::Approx(10.0));
  CHECK(poly_degree(ol.num) == 0);
  CHECK(poly_degree(ol.den) == 4);
  const std::vector<std::complex<double>> expected{-10.0, -2.0, -1.0, -100.0};
  CHECK(oracle::matched_max_error(as_complex(poles(ol)), expected) <= 1e-9);

  const auto cp = poles(cl);
  bool found = false;
  for (const auto& e : cp) {
    if (e.sigma >= -0.7 && e.sigma <= -0.4 && std::abs(e.omega) >= 4.2 && std::abs(e.omega) <= 5.0) found = true;
  }
  CHECK(found);
  for (std::size_t i = 1; i < cp.size(); ++i) CHECK(cp[i - 1].sigma >= cp[i].sigma);
  for (const auto& e : cp) {
    bool has_conjugate = false;
    for (const auto& f : cp) has_conjugate |= std::abs(f.value() - std::conj(e.value())) <= 1e-9;
    CHECK(has_conjugate);
  }
  CHECK(oracle::matched_max_error(as_complex(poles({{1}, {2, 3, 1}})), {{-1, 0}, {-2, 0}}) <= 1e-12);
  CHECK_THROWS(poles({{1}, {3}}));

  AvrParams bad = nominal;
  bad.ta = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  AvrParams wide = nominal;
  wide.ks = 5.0;
  CHECK(wide.range_warnings().size() == 1);
  CHECK(nominal.range_warnings().empty());
  wide.set("ka", 25.0);
  CHECK(wide.get("ka") == 25.0);
  CHECK_THROWS_AS(wide.set("kz", 1.0), DomainError);
}

TEST_CASE("state-space realization") {
  const auto first = tf_to_ss({{1}, {1, 1}});
  CHECK(first.a(0, 0) == -1.0);
  CHECK(first.b(0, 0) == 1.0);
  CHECK(first.c(0, 0) == 1.0);
  CHECK(first.d(0, 0) == 0.0);
  const auto cl = avr_closed_loop(AvrParams{});
  const auto ss = tf_to_ss(cl);
  CHECK(oracle::matched_max_error(eig(ss.a), as_complex(poles(cl))) <= 1e-8);
  CHECK(tf_to_ss({{2, 1}, {1, 1}}).d(0, 0) == 1.0);
  CHECK_THROWS_AS(tf_to_ss({{0, 0, 1}, {1, 1}}), DomainError);
  // The block-chain plant and the transfer function agree at DC.
  const auto plant = avr_plant(AvrParams{});
  const double dc = -(plant.c * plant.a.inverse() * plant.b)(0, 0);
  CHECK(dc == doctest::Approx(avr_forward(AvrParams{}).dc_gain()));
}

TEST_CASE("step response and metrics") {
  const auto lag = tf_to_ss({{1}, {1, 1}});
  const auto tr = step_response(lag, 1e-4, 30.0);
  CHECK(tr.t[10000] == doctest::Approx(1.0));
  CHECK(std::abs(tr.y[10000] - (1 - std::exp(-1.0))) <= 1e-5);
  const auto m = step_metrics(tr);
  CHECK(std::abs(m.rise_time_s - std::log(9.0)) <= 1e-4);
  CHECK(std::abs(m.settling_time_s - std::log(50.0)) <= 1e-4);
  CHECK(m.overshoot_pct == 0.0);
  CHECK(m.final_value == doctest::Approx(1.0));
  CHECK_FALSE(m.flatline);

  const auto under = step_metrics(step_response(tf_to_ss({{1}, {1, 1, 1}}), 1e-4, 30.0));
  CHECK(under.overshoot_pct == doctest::Approx(100 * std::exp(-0.5 * M_PI / std::sqrt(0.75))).epsilon(1e-4));
  CHECK(under.overshoot_pct == doctest::Approx(16.303).epsilon(1e-4));
  CHECK(under.peak_time_s == doctest::Approx(M_PI / std::sqrt(0.75)).epsilon(1e-4));

  const auto avr = step_response(tf_to_ss(avr_closed_loop(AvrParams{})), 1e-4, 20.0);
  CHECK(std::abs(avr.y.back() - 10.0 / 11.0) <= 1e-3);

  const auto zero = step_response(tf_to_ss({{0}, {1, 1}}), 1e-3, 2.0);
  for (const double v : zero.y) CHECK(v == 0.0);
  const auto flat = step_metrics(zero);
  CHECK(flat.flatline);
  CHECK(flat.rise_time_s == 0.0);

  CHECK_THROWS_AS(step_metrics(step_response(lag, 1e-3, 2.0)), NotSettledError);
  CHECK_THROWS_AS(step_response(tf_to_ss({{1}, {-1, 1}}), 1e-2, 100.0), DivergenceError);
  CHECK_THROWS_AS(step_response(lag, 0.0, 1.0), DomainError);
}

TEST_CASE("frequency margins") {
  const auto a = bode_margins({{2}, {1, 3, 3, 1}});
  CHECK(std::abs(a.pm_deg - 67.61) <= 0.1);
  CHECK(std::abs(a.gcf_rad_s - 0.7664) <= 1e-3);
  CHECK(a.gm_db == doctest::Approx(20 * std::log10(4.0)).epsilon(1e-6));
  const auto b = bode_margins({{8}, {1, 3, 3, 1}});
  CHECK(std::abs(b.gm_db) <= 0.01);
  CHECK(std::abs(b.pcf_rad_s - std::sqrt(3.0)) <= 1e-3);
  const auto g = bode_margins({{0.5}, {1}});
  CHECK(std::isinf(g.gm_db));
  CHECK(std::isinf(g.pm_deg));
}

TEST_CASE("PID") {
  const auto p_only = pid_controller(3.0, 0.0, 0.0);
  CHECK(poly_degree(p_only.den) == 0);
  CHECK(p_only.dc_gain() == doctest::Approx(3.0));
  CHECK(std::abs(pid_controller(1, 0.5, 0.1).eval({0, 1e-9})) > 1e8);
  const auto cl = pid_closed_loop(AvrParams{}, PidGains{});
  const auto m = step_metrics(step_response(tf_to_ss(cl), 1e-4, 20.0));
  CHECK(m.steady_state_error_pct < 0.1);
  CHECK_THROWS_AS(pid_controller(1, 1, 1, 0.0), DomainError);
}

TEST_CASE("Riccati and Kalman gains") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const auto s0 = lqr_gain(Eigen::MatrixXd::Zero(1, 1), one, one, one);
  CHECK(s0.p(0, 0) == doctest::Approx(1.0));
  CHECK(s0.k(0, 0) == doctest::Approx(1.0));
  const auto s1 = lqr_gain(-one, one, one, one);
  CHECK(s1.p(0, 0) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-10));
  CHECK(s1.k(0, 0) == doctest::Approx(0.41421).epsilon(1e-5));
  CHECK(kalman_gain(Eigen::MatrixXd::Zero(1, 1), one, one, one)(0, 0) == doctest::Approx(1.0));

  const auto plant = avr_plant(AvrParams{});
  const Eigen::MatrixXd q = Eigen::Vector4d(1, 1, 1000, 1).asDiagonal();
  const Eigen::MatrixXd r = 0.01 * one;
  const auto lqr = lqr_gain(plant.a, plant.b, q, r);
  CHECK(lqr.residual <= kAreTolerance);
  CHECK(care_residual(plant.a, plant.b, q, r, lqr.p) <= kAreTolerance);
  for (const auto& e : eig(plant.a - plant.b * lqr.k)) CHECK(e.real() < 0);

  const Eigen::MatrixXd w = 1e-2 * Eigen::MatrixXd::Identity(4, 4);
  const auto kk = kalman_gain(plant.a, plant.c, w, 1e-4 * one);
  for (const auto& e : eig(plant.a - kk * plant.c)) CHECK(e.real() < 0);
  const auto tiny = kalman_gain(plant.a, plant.c, 1e-12 * Eigen::MatrixXd::Identity(4, 4), 1e-4 * one);
  CHECK(tiny.norm() <= 1e-5);
  CHECK(tiny.norm() < 1e-3 * kk.norm());

  CHECK_THROWS_AS(lqr_gain(plant.a, plant.b, -q, r), DomainError);
  CHECK_THROWS_AS(lqr_gain(plant.a, plant.b, q, -r), DomainError);
}

TEST_CASE("LQG closed loop") {
  const ControllerDesign design;
  const auto g = design_gains(design);
  CHECK(g.lqr.residual <= kAreTolerance);
  CHECK(g.lqg_regulator.residual <= kAreTolerance);
  CHECK(g.kalman_dual.residual <= kAreTolerance);
  const auto plant = avr_plant(AvrParams{});

  const auto lqg = lqg_closed_loop(plant, g.lqg_regulator.k, g.kalman, g.lqg_nbar);
  auto expected = eig(plant.a - plant.b * g.lqg_regulator.k);
  for (const auto& e : eig(plant.a - g.kalman * plant.c)) expected.push_back(e);
  CHECK(oracle::matched_max_error(eig(lqg.a), expected) <= 1e-6);

  // Fast estimator on a plant that differs from its model: LQG tracks LQR.
  AvrParams shifted;
  shifted.ks = 1.2;
  const auto real_plant = avr_plant(shifted);
  const auto fast = kalman_gain(plant.a, plant.c, 1e4 * Eigen::MatrixXd::Identity(4, 4),
                                Eigen::MatrixXd::Constant(1, 1, 1e-4));
  const auto y_lqr = step_response(lqr_closed_loop(real_plant, g.lqr.k, g.lqr_nbar), 1e-4, 10.0);
  const auto y_lqg = step_response(lqg_closed_loop(real_plant, g.lqr.k, fast, g.lqr_nbar, &plant), 1e-4, 10.0);
  CHECK(max_abs_diff(y_lqr, y_lqg) <= 0.02 * max_abs(y_lqr));

  const auto unstable = lqg_closed_loop(real_plant, g.lqr.k, -g.kalman, g.lqr_nbar, &plant);
  CHECK_THROWS_AS(step_response(unstable, 1e-4, 20.0), DivergenceError);

  CHECK_THROWS_AS(lqg_closed_loop(plant, g.lqr.k, Eigen::MatrixXd::Ones(3, 1)), ShapeError);
}

TEST_CASE("controller study") {
  for (const auto c : {Controller::none, Controller::pid, Controller::lqr, Controller::lqg}) {
    CHECK(parse_controller(controller_name(c)) == c);
    for (const auto& e : closed_loop_poles(c, AvrParams{})) CHECK(e.sigma < 0);
  }
  CHECK_THROWS(parse_controller("mpc"));
  const std::vector<double> values{10, 40};
  const auto rows = parameter_sweep(Controller::lqr, "ka", values);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].metrics.has_value());
  CHECK(rows[1].value == 40);
  // An unstable uncontrolled loop is reported in the row, not thrown.
  const std::vector<double> big{400};
  const auto div = parameter_sweep(Controller::none, "ka", big);
  CHECK_FALSE(div[0].metrics.has_value());
  CHECK_FALSE(div[0].error.empty());
}

TEST_CASE("two-bus voltage") {
  const auto base = two_bus_voltage(0, 0);
  REQUIRE(base.size() == 2);
  CHECK(base[0] == doctest::Approx(1.0));
  CHECK(base[1] == doctest::Approx(0.0));
  const auto nose = two_bus_voltage(0, 0.25);
  REQUIRE(nose.size() == 1);
  CHECK(nose[0] == doctest::Approx(std::sqrt(0.25)));
  CHECK(two_bus_voltage(0.6, 0).empty());
  // Each root satisfies v^4 + (2q - 1) v^2 + p^2 + q^2 = 0.
  for (const double v : two_bus_voltage(0.3, 0.1)) {
    CHECK(std::pow(v, 4) + (2 * 0.1 - 1) * v * v + 0.09 + 0.01 == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("closed-loop poles are continuous in the gains") {
  const AvrParams nominal;
  const auto base = as_complex(poles(avr_closed_loop(nominal)));
  for (const char* name : {"ka", "ke", "kg", "ks"}) {
    AvrParams p = nominal;
    p.set(name, p.get(name) + 1e-9);
    CHECK(oracle::matched_max_error(as_complex(poles(avr_closed_loop(p))), base) < 1e-6);
  }
}
