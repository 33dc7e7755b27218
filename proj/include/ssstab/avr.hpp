#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssstab/modal.hpp"

// Automatic voltage regulator lab: transfer functions, state-space models,
// PID/LQR/LQG synthesis, step responses and frequency margins.
namespace ssstab::avr {

using modal::ComplexEigenvalue;

/// Polynomial coefficients in ascending powers of s.
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, double k);
/// Drops highest-order coefficients with |c| <= tol.
Poly poly_trim(Poly a, double tol = 0.0);
int poly_degree(const Poly& a);
std::complex<double> poly_eval(const Poly& a, std::complex<double> s);
/// lead * prod (s - r_i); roots must be closed under conjugation.
Poly poly_from_roots(std::span<const ComplexEigenvalue> roots, double lead);

struct TransferFunction {
  Poly num;
  Poly den;

  void validate() const;
  bool is_proper() const;
  std::complex<double> eval(std::complex<double> s) const;
  double dc_gain() const;
};

TransferFunction series(const TransferFunction& a, const TransferFunction& b);
/// Negative feedback: forward / (1 + forward * path).
TransferFunction feedback(const TransferFunction& forward, const TransferFunction& path);
/// Cancels pole-zero pairs closer than tol (relative to their magnitude).
TransferFunction minreal(const TransferFunction& tf, double tol = 1e-8);

struct AvrParams {
  double ka = 10.0, ta = 0.1;
  double ke = 1.0, te = 0.5;
  double kg = 1.0, tg = 1.0;
  double ks = 1.0, ts = 0.01;

  void validate() const;
  /// Messages for values outside the standard isolated-system ranges.
  std::vector<std::string> range_warnings() const;
  /// Sets one parameter by name (ka, ta, ke, te, kg, tg, ks, ts).
  void set(const std::string& name, double value);
  double get(const std::string& name) const;
};

/// All time constants at the upper end of their standard ranges.
AvrParams max_time_constants(AvrParams p);

/// KA KE KG / ((1 + TA s)(1 + TE s)(1 + TG s)).
TransferFunction avr_forward(const AvrParams& p);
/// KS / (1 + TS s).
TransferFunction avr_sensor(const AvrParams& p);
/// KA KE KG (1 + TS s) / ((1 + TA s)(1 + TE s)(1 + TG s)(1 + TS s) + KA KE KG KS).
TransferFunction avr_closed_loop(const AvrParams& p);
/// KA KE KG KS / ((1 + TA s)(1 + TE s)(1 + TG s)(1 + TS s)).
TransferFunction avr_open_loop(const AvrParams& p);

struct StateSpace {
  Eigen::MatrixXd a, b, c, d;

  void validate() const;
  Eigen::Index order() const { return a.rows(); }
};

/// Controllable canonical realization.
StateSpace tf_to_ss(const TransferFunction& tf);

/// Open-loop block chain with states (v_A, v_E, v_t, v_S); input is the amplifier
/// command, output the terminal voltage v_t.
StateSpace avr_plant(const AvrParams& p);
/// Output matrix selecting the sensor state v_S of avr_plant.
Eigen::MatrixXd avr_sensor_output();

struct Trajectory {
  std::vector<double> t;
  std::vector<double> y;
};

/// Unit-step response from rest, fixed-step classical Runge-Kutta 4.
/// Throws DivergenceError if the state becomes non-finite or exceeds kBlowUp.
Trajectory step_response(const StateSpace& sys, double dt = 1e-4, double horizon = 10.0);
inline constexpr double kBlowUp = 1e12;

struct StepMetrics {
  double rise_time_s = 0.0;
  double settling_time_s = 0.0;
  double peak_time_s = 0.0;
  double peak = 0.0;
  double overshoot_pct = 0.0;
  double steady_state_error_pct = 0.0;
  double final_value = 0.0;
  bool flatline = false;
};

/// Final value from the trailing 5 % of samples; 10-90 % rise; +/-2 % settling.
/// Throws NotSettledError if the trailing window varies by 0.5 % or more.
StepMetrics step_metrics(const Trajectory& traj);

std::vector<ComplexEigenvalue> poles(const TransferFunction& tf);

struct Margins {
  double gm_db = 0.0;
  double pm_deg = 0.0;
  double pcf_rad_s = 0.0;  // phase crossover (-180 deg)
  double gcf_rad_s = 0.0;  // gain crossover (|L| = 1)
};

/// Gain and phase margins over [1e-3, 1e5] rad/s; a missing crossing gives +inf.
Margins bode_margins(const TransferFunction& open_loop);

struct PidGains {
  double kp = 1.2;
  double ki = 0.5;
  double kd = 0.1;
  double tau_f = 0.01;  // derivative filter time constant, s
};

/// kp + ki / s + kd s / (tau_f s + 1), reduced by pole-zero cancellation.
TransferFunction pid_controller(double kp, double ki, double kd, double tau_f = 0.01);
/// r -> v_t with the PID acting on r - v_S.
TransferFunction pid_closed_loop(const AvrParams& p, const PidGains& gains);

struct LqrResult {
  Eigen::MatrixXd k;  // r^-1 b' p
  Eigen::MatrixXd p;  // stabilizing ARE solution
  double residual = 0.0;
};

/// Frobenius norm of a'p + p a - p b r^-1 b' p + q.
double care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& p);
/// Stabilizing solution of the continuous ARE (Hamiltonian eigenvectors, then Newton-Kleinman).
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                           const Eigen::MatrixXd& r);
inline constexpr double kAreTolerance = 1e-9;

LqrResult lqr_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                   const Eigen::MatrixXd& r);
/// Steady-state estimator gain from the dual ARE.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, const Eigen::MatrixXd& w,
                            const Eigen::MatrixXd& v);

/// Static prescale -1 / (c (a - b k)^-1 b) giving unit DC gain under u = -k x + nbar r.
double reference_gain(const StateSpace& plant, const Eigen::MatrixXd& k);
/// (a - b k, b nbar, c, 0).
StateSpace lqr_closed_loop(const StateSpace& plant, const Eigen::MatrixXd& k, double nbar = 1.0);
/// States (x, x_hat): plant driven by u = -k x_hat + nbar r, estimator built on `model`
/// (defaults to the plant) and corrected by k_k (y - c x_hat).
StateSpace lqg_closed_loop(const StateSpace& plant, const Eigen::MatrixXd& k, const Eigen::MatrixXd& k_k,
                           double nbar = 1.0, const StateSpace* model = nullptr);

/// Real non-negative roots of the normalized two-bus voltage equation.
std::vector<double> two_bus_voltage(double p, double q);

// ---- controller study ------------------------------------------------------

enum class Controller { none, pid, lqr, lqg };
std::string controller_name(Controller c);
Controller parse_controller(const std::string& name);

struct ControllerDesign {
  PidGains pid{};
  std::vector<double> lqr_q{1.0, 1.0, 1000.0, 1.0};  // diagonal
  double lqr_r = 0.01;
  std::vector<double> lqg_q{1.0, 100.0, 1e5, 1.0};
  double lqg_r = 0.01;
  double kalman_w = 1e-2;  // times identity
  double kalman_v = 1e-4;
  AvrParams nominal{};     // plant the gains are designed on
};

struct DesignedGains {
  LqrResult lqr;
  double lqr_nbar = 1.0;
  LqrResult lqg_regulator;
  double lqg_nbar = 1.0;
  Eigen::MatrixXd kalman;
  LqrResult kalman_dual;  // ARE solution behind the Kalman gain
  StateSpace model;       // nominal plant
};

DesignedGains design_gains(const ControllerDesign& design);

/// r -> v_t with the chosen controller on plant `p`; gains are fixed at their nominal design.
StateSpace controlled_system(Controller c, const AvrParams& p, const ControllerDesign& design,
                             const DesignedGains& gains);
StateSpace controlled_system(Controller c, const AvrParams& p, const ControllerDesign& design = {});

/// Closed-loop poles of controlled_system.
std::vector<ComplexEigenvalue> closed_loop_poles(Controller c, const AvrParams& p,
                                                 const ControllerDesign& design = {});

struct SweepRow {
  std::string param;
  double value = 0.0;
  std::optional<StepMetrics> metrics;  // empty when the response diverges or never settles
  std::string error;
};

std::vector<SweepRow> parameter_sweep(Controller c, const std::string& param, std::span<const double> values,
                                      const ControllerDesign& design = {}, const AvrParams& base = {},
                                      double dt = 1e-4, double horizon = 20.0);

}  // namespace ssstab::avr
