#include "ssstab/modal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ssstab/errors.hpp"

namespace ssstab::modal {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "satisfactory", "good", "acceptable", "critical", "unstable", "irrelevant"};

bool descending(const ComplexEigenvalue& a, const ComplexEigenvalue& b) {
  if (a.sigma != b.sigma) return a.sigma > b.sigma;
  return a.omega > b.omega;
}

double condition_estimate(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

}  // namespace

double ComplexEigenvalue::magnitude() const { return std::hypot(sigma, omega); }

StabilityLabel label_from_index(std::size_t index) {
  if (index >= kLabelCount) throw DomainError("label index out of range: " + std::to_string(index));
  return kLabelOrder[index];
}

std::string_view label_name(StabilityLabel label) { return kNames[label_index(label)]; }

StabilityLabel parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kNames[i] == name) return kLabelOrder[i];
  }
  throw ParseError("unknown stability label '" + std::string(name) + "'");
}

void LabelThresholds::validate() const {
  if (!(0.0 < critical_max_pct && critical_max_pct < acceptable_max_pct &&
        acceptable_max_pct < good_max_pct && good_max_pct <= 100.0)) {
    throw ValidationError("label thresholds must satisfy 0 < critical < acceptable < good <= 100");
  }
}

std::vector<ComplexEigenvalue> eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("eigenvalues: matrix is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ", not square");
  }
  if (a.rows() > 64) throw ShapeError("eigenvalues: dimension above 64 is not supported");
  if (!a.allFinite()) throw DomainError("eigenvalues: matrix has non-finite entries");
  if (a.rows() == 0) return {};

  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigenvalues: QR iteration did not converge (n=" << a.rows()
        << ", cond~" << condition_estimate(a) << ", norm=" << a.norm() << ")";
    throw ConvergenceError(msg.str());
  }

  const auto& ev = solver.eigenvalues();
  std::vector<ComplexEigenvalue> out;
  out.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back({ev(i).real(), ev(i).imag()});

  // Pair each upper-half eigenvalue with its nearest lower-half partner and
  // make them exact conjugates.
  std::vector<bool> used(out.size(), false);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (used[i] || out[i].omega <= 0.0) continue;
    std::size_t best = out.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (used[j] || j == i || out[j].omega >= 0.0) continue;
      const double d = std::hypot(out[i].sigma - out[j].sigma, out[i].omega + out[j].omega);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == out.size()) continue;
    const double s = 0.5 * (out[i].sigma + out[best].sigma);
    const double w = 0.5 * (out[i].omega - out[best].omega);
    out[i] = {s, w};
    out[best] = {s, -w};
    used[i] = used[best] = true;
  }
  std::sort(out.begin(), out.end(), descending);
  return out;
}

Eigen::MatrixXd companion_matrix(std::span<const double> ascending) {
  std::size_t degree = ascending.size();
  while (degree > 0 && ascending[degree - 1] == 0.0) --degree;
  if (degree < 2) throw DomainError("companion_matrix: polynomial degree must be >= 1");
  const std::size_t n = degree - 1;
  const double lead = ascending[n];
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) c(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -ascending[i] / lead;
  }
  return c;
}

std::vector<ComplexEigenvalue> polynomial_roots(std::span<const double> ascending) {
  return eigenvalues(companion_matrix(ascending));
}

double damping_ratio(ComplexEigenvalue eig) {
  const double r = eig.magnitude();
  if (r == 0.0) return kAtOrigin;
  return std::clamp(100.0 * (-eig.sigma) / r, -100.0, 100.0);
}

ComplexEigenvalue normalize(ComplexEigenvalue eig) {
  const double r = eig.magnitude();
  if (!(r > 1.0)) return eig;
  return {eig.sigma / r, eig.omega / r};
}

std::vector<ComplexEigenvalue> normalize_eigs(std::span<const ComplexEigenvalue> eigs) {
  std::vector<ComplexEigenvalue> out;
  out.reserve(eigs.size());
  for (const auto& e : eigs) out.push_back(normalize(e));
  return out;
}

StabilityLabel classify(ComplexEigenvalue eig, const LabelThresholds& t) {
  if (eig.sigma == 0.0 && eig.omega == 0.0) return StabilityLabel::critical;
  if (t.irrelevant_is_real_axis && eig.omega == 0.0 && eig.sigma < 0.0) {
    return StabilityLabel::irrelevant;
  }
  const double zeta = damping_ratio(eig);
  if (zeta < 0.0) return StabilityLabel::unstable;
  if (zeta < t.critical_max_pct) return StabilityLabel::critical;
  if (zeta < t.acceptable_max_pct) return StabilityLabel::acceptable;
  if (zeta < t.good_max_pct) return StabilityLabel::good;
  return StabilityLabel::satisfactory;
}

DampingRecord make_record(ComplexEigenvalue raw, const LabelThresholds& thresholds,
                          std::int64_t scenario_id) {
  DampingRecord rec;
  rec.eig = normalize(raw);
  const double zeta = damping_ratio(rec.eig);
  rec.zeta_pct = std::isnan(zeta) ? 0.0 : zeta;
  rec.label = classify(rec.eig, thresholds);
  rec.scenario_id = scenario_id;
  return rec;
}

std::vector<ComplexEigenvalue> snap_small(std::span<const ComplexEigenvalue> eigs, double tol) {
  std::vector<ComplexEigenvalue> out(eigs.begin(), eigs.end());
  for (auto& e : out) {
    if (std::abs(e.sigma) <= tol) e.sigma = 0.0;
    if (std::abs(e.omega) <= tol) e.omega = 0.0;
  }
  std::sort(out.begin(), out.end(), descending);
  return out;
}

}  // namespace ssstab::modal
