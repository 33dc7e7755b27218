#include "ssstab/avr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ssstab/errors.hpp"

namespace ssstab::avr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_stable(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return true;
  for (const auto& e : modal::eigenvalues(a)) {
    if (!(e.sigma < 0.0)) return false;
  }
  return true;
}

void require_symmetric_psd(const Eigen::MatrixXd& m, bool definite, const char* what) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-12 * scale) throw DomainError(std::string(what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const double lo = es.eigenvalues().minCoeff();
  if (definite ? !(lo > 0.0) : lo < -1e-12 * scale) {
    throw DomainError(std::string(what) + (definite ? " must be positive definite" : " must be positive semidefinite"));
  }
}

// Solves a' x + x a = -m for symmetric x via the Kronecker form.
Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m) {
  const auto n = a.rows();
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += eye(i, j) * at;
      big.block(i * n, j * n, n, n) += at(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(m.data(), n * n);
  const Eigen::VectorXd sol = big.fullPivLu().solve(rhs);
  Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
  return 0.5 * (x + x.transpose());
}

double interpolate_crossing(double t0, double y0, double t1, double y1, double level) {
  if (y1 == y0) return t1;
  return t0 + (level - y0) * (t1 - t0) / (y1 - y0);
}

double wrap_pi(double x) {
  while (x > std::numbers::pi) x -= 2.0 * std::numbers::pi;
  while (x <= -std::numbers::pi) x += 2.0 * std::numbers::pi;
  return x;
}

}  // namespace

// ---- polynomials -----------------------------------------------------------

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly poly_scale(const Poly& a, double k) {
  Poly out = a;
  for (auto& c : out) c *= k;
  return out;
}

Poly poly_trim(Poly a, double tol) {
  while (!a.empty() && std::abs(a.back()) <= tol) a.pop_back();
  return a;
}

int poly_degree(const Poly& a) { return static_cast<int>(poly_trim(a).size()) - 1; }

std::complex<double> poly_eval(const Poly& a, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) acc = acc * s + a[i];
  return acc;
}

Poly poly_from_roots(std::span<const ComplexEigenvalue> roots, double lead) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= c[i] * r.value();
    }
    c = std::move(next);
  }
  Poly out;
  for (const auto& v : c) out.push_back(lead * v.real());
  return out;
}

// ---- transfer functions ----------------------------------------------------

void TransferFunction::validate() const {
  const auto d = poly_trim(den);
  if (d.empty()) throw DomainError("transfer function: denominator is zero");
  for (const double c : num) {
    if (!std::isfinite(c)) throw DomainError("transfer function: non-finite numerator");
  }
  for (const double c : den) {
    if (!std::isfinite(c)) throw DomainError("transfer function: non-finite denominator");
  }
}

bool TransferFunction::is_proper() const { return poly_degree(num) <= poly_degree(den); }

std::complex<double> TransferFunction::eval(std::complex<double> s) const {
  return poly_eval(num, s) / poly_eval(den, s);
}

double TransferFunction::dc_gain() const {
  const double d0 = den.empty() ? 0.0 : den[0];
  const double n0 = num.empty() ? 0.0 : num[0];
  if (d0 == 0.0) return n0 == 0.0 ? std::numeric_limits<double>::quiet_NaN() : kInf;
  return n0 / d0;
}

TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
  return {poly_mul(a.num, b.num), poly_mul(a.den, b.den)};
}

TransferFunction feedback(const TransferFunction& g, const TransferFunction& h) {
  return {poly_mul(g.num, h.den), poly_add(poly_mul(g.den, h.den), poly_mul(g.num, h.num))};
}

TransferFunction minreal(const TransferFunction& tf, double tol) {
  tf.validate();
  const Poly num = poly_trim(tf.num);
  const Poly den = poly_trim(tf.den);
  if (num.empty()) return {{0.0}, {1.0}};
  std::vector<ComplexEigenvalue> zs = num.size() > 1 ? modal::polynomial_roots(num) : std::vector<ComplexEigenvalue>{};
  std::vector<ComplexEigenvalue> ps = den.size() > 1 ? modal::polynomial_roots(den) : std::vector<ComplexEigenvalue>{};
  bool cancelled = false;
  for (std::size_t i = 0; i < zs.size();) {
    bool hit = false;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double scale = std::max(1.0, std::abs(ps[j].value()));
      if (std::abs(zs[i].value() - ps[j].value()) <= tol * scale) {
        zs.erase(zs.begin() + static_cast<std::ptrdiff_t>(i));
        ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(j));
        hit = cancelled = true;
        break;
      }
    }
    if (!hit) ++i;
  }
  if (!cancelled) return {num, den};
  const double gain = num.back() / den.back();
  return {poly_from_roots(zs, gain), poly_from_roots(ps, 1.0)};
}

// ---- AVR models ------------------------------------------------------------

void AvrParams::validate() const {
  for (const double t : {ta, te, tg, ts}) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("AVR time constants must be > 0");
  }
  for (const double k : {ka, ke, kg, ks}) {
    if (!std::isfinite(k)) throw DomainError("AVR gains must be finite");
  }
}

std::vector<std::string> AvrParams::range_warnings() const {
  struct Range {
    const char* name;
    double value, lo, hi;
  };
  const Range ranges[] = {{"ka", ka, 10, 40},   {"ta", ta, 0.02, 0.1}, {"ke", ke, 1, 10},
                          {"te", te, 0.5, 1.0}, {"kg", kg, 0.7, 1.0},  {"tg", tg, 1.0, 2.0},
                          {"ks", ks, 1.0, 2.0}, {"ts", ts, 0.001, 0.06}};
  std::vector<std::string> out;
  for (const auto& r : ranges) {
    if (r.value < r.lo || r.value > r.hi) {
      std::ostringstream msg;
      msg << r.name << " = " << r.value << " outside the standard range [" << r.lo << ", " << r.hi << "]";
      out.push_back(msg.str());
    }
  }
  return out;
}

void AvrParams::set(const std::string& name, double value) {
  if (name == "ka") ka = value;
  else if (name == "ta") ta = value;
  else if (name == "ke") ke = value;
  else if (name == "te") te = value;
  else if (name == "kg") kg = value;
  else if (name == "tg") tg = value;
  else if (name == "ks") ks = value;
  else if (name == "ts") ts = value;
  else throw DomainError("unknown AVR parameter '" + name + "'");
}

double AvrParams::get(const std::string& name) const {
  if (name == "ka") return ka;
  if (name == "ta") return ta;
  if (name == "ke") return ke;
  if (name == "te") return te;
  if (name == "kg") return kg;
  if (name == "tg") return tg;
  if (name == "ks") return ks;
  if (name == "ts") return ts;
  throw DomainError("unknown AVR parameter '" + name + "'");
}

AvrParams max_time_constants(AvrParams p) {
  p.ta = 0.1;
  p.te = 1.0;
  p.tg = 2.0;
  p.ts = 0.06;
  return p;
}

TransferFunction avr_forward(const AvrParams& p) {
  p.validate();
  return {{p.ka * p.ke * p.kg}, poly_mul(poly_mul({1.0, p.ta}, {1.0, p.te}), {1.0, p.tg})};
}

TransferFunction avr_sensor(const AvrParams& p) {
  p.validate();
  return {{p.ks}, {1.0, p.ts}};
}

TransferFunction avr_closed_loop(const AvrParams& p) {
  const double k = p.ka * p.ke * p.kg;
  const auto fwd = avr_forward(p);
  Poly den = poly_mul(fwd.den, {1.0, p.ts});
  den[0] += k * p.ks;
  return {poly_scale({1.0, p.ts}, k), den};
}

TransferFunction avr_open_loop(const AvrParams& p) { return series(avr_forward(p), avr_sensor(p)); }

// ---- state space -----------------------------------------------------------

void StateSpace::validate() const {
  const auto n = a.rows();
  if (a.cols() != n) throw ShapeError("state space: a is not square");
  if (b.rows() != n) throw ShapeError("state space: b rows differ from a");
  if (c.cols() != n) throw ShapeError("state space: c columns differ from a");
  if (d.rows() != c.rows() || d.cols() != b.cols()) throw ShapeError("state space: d has the wrong shape");
}

StateSpace tf_to_ss(const TransferFunction& tf) {
  tf.validate();
  const Poly den = poly_trim(tf.den);
  Poly num = poly_trim(tf.num);
  if (num.size() > den.size()) throw DomainError("tf_to_ss: improper transfer function");
  const auto n = static_cast<Eigen::Index>(den.size() - 1);
  const double lead = den.back();
  num.resize(den.size(), 0.0);
  const double d = num.back() / lead;

  StateSpace ss;
  ss.a = Eigen::MatrixXd::Zero(n, n);
  ss.b = Eigen::MatrixXd::Zero(n, 1);
  ss.c = Eigen::MatrixXd::Zero(1, n);
  ss.d = Eigen::MatrixXd::Constant(1, 1, d);
  for (Eigen::Index i = 0; i + 1 < n; ++i) ss.a(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    ss.a(n - 1, j) = -den[sj] / lead;
    ss.c(0, j) = num[sj] / lead - d * den[sj] / lead;
  }
  if (n > 0) ss.b(n - 1, 0) = 1.0;
  return ss;
}

StateSpace avr_plant(const AvrParams& p) {
  p.validate();
  StateSpace ss;
  ss.a = Eigen::MatrixXd::Zero(4, 4);
  ss.a(0, 0) = -1.0 / p.ta;
  ss.a(1, 0) = p.ke / p.te;
  ss.a(1, 1) = -1.0 / p.te;
  ss.a(2, 1) = p.kg / p.tg;
  ss.a(2, 2) = -1.0 / p.tg;
  ss.a(3, 2) = p.ks / p.ts;
  ss.a(3, 3) = -1.0 / p.ts;
  ss.b = Eigen::MatrixXd::Zero(4, 1);
  ss.b(0, 0) = p.ka / p.ta;
  ss.c = Eigen::MatrixXd::Zero(1, 4);
  ss.c(0, 2) = 1.0;
  ss.d = Eigen::MatrixXd::Zero(1, 1);
  return ss;
}

Eigen::MatrixXd avr_sensor_output() {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 4);
  c(0, 3) = 1.0;
  return c;
}

// ---- simulation ------------------------------------------------------------

Trajectory step_response(const StateSpace& sys, double dt, double horizon) {
  sys.validate();
  if (!(dt > 0.0) || !(horizon > dt)) throw DomainError("step_response: need dt > 0 and horizon > dt");
  if (sys.b.cols() != 1 || sys.c.rows() != 1) throw ShapeError("step_response: single-input single-output only");
  const auto n = sys.order();
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

  // One classical RK4 step for x' = a x + b (u = 1) is x <- m x + g.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ha = dt * sys.a;
  const Eigen::MatrixXd ha2 = ha * ha;
  const Eigen::MatrixXd ha3 = ha2 * ha;
  const Eigen::MatrixXd m = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 * ha / 24.0;
  const Eigen::VectorXd g = dt * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) * sys.b.col(0);
  const Eigen::RowVectorXd c = sys.c.row(0);
  const double d = sys.d(0, 0);

  Trajectory out;
  out.t.reserve(steps + 1);
  out.y.reserve(steps + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  out.t.push_back(0.0);
  out.y.push_back(n > 0 ? c.dot(x) + d : d);
  for (std::size_t k = 1; k <= steps; ++k) {
    next.noalias() = m * x;
    x = next + g;
    const double t = static_cast<double>(k) * dt;
    const double amax = n > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(amax) || amax > kBlowUp) {
      std::ostringstream msg;
      msg << "step_response: state diverged at t = " << t << " s";
      throw DivergenceError(msg.str(), t);
    }
    out.t.push_back(t);
    out.y.push_back((n > 0 ? c.dot(x) : 0.0) + d);
  }
  return out;
}

StepMetrics step_metrics(const Trajectory& traj) {
  const auto& t = traj.t;
  const auto& y = traj.y;
  const std::size_t n = y.size();
  if (n < 20 || t.size() != n) throw DomainError("step_metrics: need at least 20 matching samples");
  const double t_end = t.back();
  const double tail_start = t_end - 0.05 * (t_end - t.front());
  std::size_t i0 = n - 1;
  while (i0 > 0 && t[i0 - 1] >= tail_start) --i0;
  double sum = 0.0, lo = kInf, hi = -kInf;
  for (std::size_t i = i0; i < n; ++i) {
    sum += y[i];
    lo = std::min(lo, y[i]);
    hi = std::max(hi, y[i]);
  }
  StepMetrics m;
  m.final_value = sum / static_cast<double>(n - i0);
  const double fv = m.final_value;
  if (hi - lo > 0.0 && !(hi - lo < 0.005 * std::abs(fv))) {
    throw NotSettledError("step_metrics: trailing window varies by more than 0.5 % of the final value");
  }
  const auto peak_it = std::max_element(y.begin(), y.end());
  m.peak = *peak_it;
  m.peak_time_s = t[static_cast<std::size_t>(peak_it - y.begin())];
  m.overshoot_pct = (fv > 0.0 && m.peak > fv) ? 100.0 * (m.peak - fv) / fv : 0.0;
  m.steady_state_error_pct = 100.0 * std::abs(1.0 - fv);

  double span = 0.0;
  for (const double v : y) span = std::max(span, std::abs(v - y.front()));
  if (span <= 1e-12 * std::max(1.0, std::abs(fv)) || fv == 0.0) {
    m.flatline = true;
    m.peak_time_s = 0.0;
    return m;
  }

  const double sgn = fv > 0.0 ? 1.0 : -1.0;
  auto first_crossing = [&](double level) {
    for (std::size_t i = 0; i < n; ++i) {
      if (sgn * (y[i] - level) >= 0.0) {
        return i == 0 ? t[0] : interpolate_crossing(t[i - 1], y[i - 1], t[i], y[i], level);
      }
    }
    return t_end;
  };
  m.rise_time_s = first_crossing(0.9 * fv) - first_crossing(0.1 * fv);

  const double band = 0.02 * std::abs(fv);
  std::size_t last_out = n;
  for (std::size_t i = n; i-- > 0;) {
    if (std::abs(y[i] - fv) > band) {
      last_out = i;
      break;
    }
  }
  if (last_out == n) {
    m.settling_time_s = t.front();
  } else if (last_out + 1 >= n) {
    throw NotSettledError("step_metrics: response never enters the 2 % band");
  } else {
    const double level = y[last_out] > fv ? fv + band : fv - band;
    m.settling_time_s = interpolate_crossing(t[last_out], y[last_out], t[last_out + 1], y[last_out + 1], level);
  }
  return m;
}

std::vector<ComplexEigenvalue> poles(const TransferFunction& tf) {
  tf.validate();
  const Poly den = poly_trim(tf.den);
  if (den.size() < 2) throw DomainError("poles: denominator degree must be >= 1");
  return modal::polynomial_roots(den);
}

Margins bode_margins(const TransferFunction& l) {
  l.validate();
  constexpr double kLo = 1e-3, kHi = 1e5;
  constexpr int kPerDecade = 60;
  const int points = static_cast<int>(std::lround(std::log10(kHi / kLo) * kPerDecade)) + 1;
  std::vector<double> w(static_cast<std::size_t>(points)), mag(w.size()), phase(w.size());
  for (int i = 0; i < points; ++i) {
    const auto k = static_cast<std::size_t>(i);
    w[k] = kLo * std::pow(10.0, static_cast<double>(i) / kPerDecade);
    const auto v = l.eval({0.0, w[k]});
    mag[k] = std::abs(v);
    const double raw = std::arg(v);
    phase[k] = k == 0 ? raw : phase[k - 1] + wrap_pi(raw - std::arg(l.eval({0.0, w[k - 1]})));
  }
  // Continuous phase near a grid point.
  auto phase_at = [&](double omega, std::size_t anchor) {
    return phase[anchor] + wrap_pi(std::arg(l.eval({0.0, omega})) - std::arg(l.eval({0.0, w[anchor]})));
  };
  auto bisect = [](double lo, double hi, auto&& f) {
    const double flo = f(lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * lo; ++it) {
      const double mid = std::sqrt(lo * hi);
      if ((f(mid) > 0.0) == (flo > 0.0)) lo = mid; else hi = mid;
    }
    return std::sqrt(lo * hi);
  };

  Margins m{kInf, kInf, kInf, kInf};
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double a = std::floor((phase[k] + pi) / (2.0 * pi));
    const double b = std::floor((phase[k + 1] + pi) / (2.0 * pi));
    if (a != b) {
      const double target = 2.0 * pi * std::max(a, b) - pi;
      const double pcf = bisect(w[k], w[k + 1], [&](double om) { return phase_at(om, k) - target; });
      m.pcf_rad_s = pcf;
      m.gm_db = -20.0 * std::log10(std::abs(l.eval({0.0, pcf})));
      break;
    }
  }
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    if ((mag[k] >= 1.0) != (mag[k + 1] >= 1.0)) {
      const double gcf = bisect(w[k], w[k + 1], [&](double om) { return std::log(std::abs(l.eval({0.0, om}))); });
      m.gcf_rad_s = gcf;
      m.pm_deg = 180.0 + phase_at(gcf, k) * 180.0 / pi;
      break;
    }
  }
  return m;
}

// ---- controllers -----------------------------------------------------------

TransferFunction pid_controller(double kp, double ki, double kd, double tau_f) {
  for (const double g : {kp, ki, kd}) {
    if (!std::isfinite(g)) throw DomainError("pid_controller: gains must be finite");
  }
  if (!(tau_f > 0.0)) throw DomainError("pid_controller: derivative filter constant must be > 0");
  const TransferFunction c{{ki, kp + ki * tau_f, kp * tau_f + kd}, {0.0, 1.0, tau_f}};
  return minreal(c);
}

TransferFunction pid_closed_loop(const AvrParams& p, const PidGains& gains) {
  const auto c = pid_controller(gains.kp, gains.ki, gains.kd, gains.tau_f);
  return feedback(series(c, avr_forward(p)), avr_sensor(p));
}

double care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd res = a.transpose() * p + p * a - p * b * r.ldlt().solve(b.transpose() * p) + q;
  return res.norm();
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                           const Eigen::MatrixXd& r) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols()) {
    throw ShapeError("solve_care: dimension mismatch");
  }
  require_symmetric_psd(q, false, "state weight q");
  require_symmetric_psd(r, true, "input weight r");

  const Eigen::MatrixXd s = b * r.ldlt().solve(b.transpose());
  Eigen::MatrixXd h(2 * n, 2 * n);
  h << a, -s, -q, -a.transpose();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h.cast<std::complex<double>>());
  if (es.info() != Eigen::Success) throw ConvergenceError("solve_care: Hamiltonian eigensolver failed");
  Eigen::MatrixXcd u(2 * n, n);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) {
      if (found == n) throw ConvergenceError("solve_care: Hamiltonian spectrum is not split");
      u.col(found++) = es.eigenvectors().col(i);
    }
  }
  if (found != n) {
    throw ConvergenceError("solve_care: Hamiltonian has eigenvalues on the imaginary axis (not stabilizable/detectable)");
  }
  const Eigen::MatrixXcd u1 = u.topRows(n);
  const Eigen::MatrixXcd u2 = u.bottomRows(n);
  Eigen::MatrixXd p = (u2 * u1.fullPivLu().inverse()).real();
  p = 0.5 * (p + p.transpose());

  // Newton-Kleinman refinement.
  double best_res = care_residual(a, b, q, r, p);
  Eigen::MatrixXd best = p;
  for (int it = 0; it < 50 && best_res > 0.01 * kAreTolerance; ++it) {
    const Eigen::MatrixXd k = r.ldlt().solve(b.transpose() * p);
    const Eigen::MatrixXd ac = a - b * k;
    if (!is_stable(ac)) break;
    p = lyapunov(ac, q + k.transpose() * r * k);
    const double res = care_residual(a, b, q, r, p);
    if (!std::isfinite(res) || res >= best_res) break;
    best_res = res;
    best = p;
  }
  if (!(best_res <= kAreTolerance)) {
    std::ostringstream msg;
    msg << "solve_care: residual " << best_res << " above tolerance " << kAreTolerance;
    throw ConvergenceError(msg.str());
  }
  return best;
}

LqrResult lqr_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                   const Eigen::MatrixXd& r) {
  LqrResult out;
  out.p = solve_care(a, b, q, r);
  out.k = r.ldlt().solve(b.transpose() * out.p);
  out.residual = care_residual(a, b, q, r, out.p);
  if (!is_stable(a - b * out.k)) throw ConvergenceError("lqr_gain: closed loop is not stable");
  return out;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, const Eigen::MatrixXd& w,
                            const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd p = solve_care(a.transpose(), c.transpose(), w, v);
  const Eigen::MatrixXd kk = p * c.transpose() * v.inverse();
  if (!is_stable(a - kk * c)) throw ConvergenceError("kalman_gain: estimator is not stable");
  return kk;
}

double reference_gain(const StateSpace& plant, const Eigen::MatrixXd& k) {
  plant.validate();
  const Eigen::MatrixXd acl = plant.a - plant.b * k;
  const double dc = (plant.c * acl.fullPivLu().solve(plant.b))(0, 0);
  if (dc == 0.0 || !std::isfinite(dc)) throw DomainError("reference_gain: closed loop has zero DC gain");
  return -1.0 / dc;
}

StateSpace lqr_closed_loop(const StateSpace& plant, const Eigen::MatrixXd& k, double nbar) {
  plant.validate();
  if (k.rows() != plant.b.cols() || k.cols() != plant.order()) throw ShapeError("lqr_closed_loop: gain shape");
  return {plant.a - plant.b * k, plant.b * nbar, plant.c, Eigen::MatrixXd::Zero(plant.c.rows(), plant.b.cols())};
}

StateSpace lqg_closed_loop(const StateSpace& plant, const Eigen::MatrixXd& k, const Eigen::MatrixXd& kk,
                           double nbar, const StateSpace* model) {
  plant.validate();
  const StateSpace& est = model ? *model : plant;
  est.validate();
  const auto n = plant.order();
  const auto ne = est.order();
  if (k.rows() != plant.b.cols() || k.cols() != ne || kk.rows() != ne || kk.cols() != plant.c.rows() ||
      est.b.cols() != plant.b.cols() || est.c.rows() != plant.c.rows()) {
    throw ShapeError("lqg_closed_loop: dimension mismatch");
  }
  if (!plant.d.isZero()) throw ShapeError("lqg_closed_loop: plant must be strictly proper");
  StateSpace out;
  out.a.resize(n + ne, n + ne);
  out.a << plant.a, -plant.b * k, kk * plant.c, est.a - est.b * k - kk * est.c;
  out.b.resize(n + ne, plant.b.cols());
  out.b << plant.b * nbar, est.b * nbar;
  out.c.resize(plant.c.rows(), n + ne);
  out.c << plant.c, Eigen::MatrixXd::Zero(plant.c.rows(), ne);
  out.d = Eigen::MatrixXd::Zero(plant.c.rows(), plant.b.cols());
  return out;
}

std::vector<double> two_bus_voltage(double p, double q) {
  const double disc = 0.25 - p * p - q;
  if (disc < 0.0) return {};
  const double root = std::sqrt(disc);
  std::vector<double> out;
  for (const double inner : {0.5 - q + root, 0.5 - q - root}) {
    if (inner >= 0.0) out.push_back(std::sqrt(inner));
    if (root == 0.0) break;
  }
  return out;
}

// ---- controller study ------------------------------------------------------

std::string controller_name(Controller c) {
  switch (c) {
    case Controller::none: return "none";
    case Controller::pid: return "pid";
    case Controller::lqr: return "lqr";
    case Controller::lqg: return "lqg";
  }
  return "?";
}

Controller parse_controller(const std::string& name) {
  for (auto c : {Controller::none, Controller::pid, Controller::lqr, Controller::lqg}) {
    if (controller_name(c) == name) return c;
  }
  throw DomainError("unknown controller '" + name + "'");
}

DesignedGains design_gains(const ControllerDesign& design) {
  DesignedGains g;
  g.model = avr_plant(design.nominal);
  const auto n = g.model.order();
  auto diag = [n](const std::vector<double>& v, const char* what) {
    if (static_cast<Eigen::Index>(v.size()) != n) throw ShapeError(std::string(what) + " must have 4 entries");
    return Eigen::VectorXd::Map(v.data(), n).asDiagonal().toDenseMatrix();
  };
  const Eigen::MatrixXd r_lqr = Eigen::MatrixXd::Constant(1, 1, design.lqr_r);
  const Eigen::MatrixXd r_lqg = Eigen::MatrixXd::Constant(1, 1, design.lqg_r);
  g.lqr = lqr_gain(g.model.a, g.model.b, diag(design.lqr_q, "lqr_q"), r_lqr);
  g.lqr_nbar = reference_gain(g.model, g.lqr.k);
  g.lqg_regulator = lqr_gain(g.model.a, g.model.b, diag(design.lqg_q, "lqg_q"), r_lqg);
  g.lqg_nbar = reference_gain(g.model, g.lqg_regulator.k);
  const Eigen::MatrixXd w = design.kalman_w * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(1, 1, design.kalman_v);
  g.kalman_dual.p = solve_care(g.model.a.transpose(), g.model.c.transpose(), w, v);
  g.kalman_dual.residual = care_residual(g.model.a.transpose(), g.model.c.transpose(), w, v, g.kalman_dual.p);
  g.kalman = kalman_gain(g.model.a, g.model.c, w, v);
  g.kalman_dual.k = g.kalman.transpose();
  return g;
}

StateSpace controlled_system(Controller c, const AvrParams& p, const ControllerDesign& design,
                             const DesignedGains& gains) {
  switch (c) {
    case Controller::none: return tf_to_ss(avr_closed_loop(p));
    case Controller::pid: return tf_to_ss(pid_closed_loop(p, design.pid));
    case Controller::lqr: return lqr_closed_loop(avr_plant(p), gains.lqr.k, gains.lqr_nbar);
    case Controller::lqg:
      return lqg_closed_loop(avr_plant(p), gains.lqg_regulator.k, gains.kalman, gains.lqg_nbar, &gains.model);
  }
  throw DomainError("unknown controller");
}

StateSpace controlled_system(Controller c, const AvrParams& p, const ControllerDesign& design) {
  if (c == Controller::none || c == Controller::pid) return controlled_system(c, p, design, DesignedGains{});
  return controlled_system(c, p, design, design_gains(design));
}

std::vector<ComplexEigenvalue> closed_loop_poles(Controller c, const AvrParams& p, const ControllerDesign& design) {
  if (c == Controller::none) return poles(avr_closed_loop(p));
  if (c == Controller::pid) return poles(minreal(pid_closed_loop(p, design.pid)));
  return modal::eigenvalues(controlled_system(c, p, design).a);
}

std::vector<SweepRow> parameter_sweep(Controller c, const std::string& param, std::span<const double> values,
                                      const ControllerDesign& design, const AvrParams& base, double dt,
                                      double horizon) {
  const DesignedGains gains =
      (c == Controller::lqr || c == Controller::lqg) ? design_gains(design) : DesignedGains{};
  std::vector<SweepRow> rows;
  for (const double v : values) {
    SweepRow row{param, v, std::nullopt, {}};
    AvrParams p = base;
    p.set(param, v);
    try {
      const auto sys = controlled_system(c, p, design, gains);
      row.metrics = step_metrics(step_response(sys, dt, horizon));
    } catch (const DivergenceError& e) {
      row.error = e.what();
    } catch (const NotSettledError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ssstab::avr
