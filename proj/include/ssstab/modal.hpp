#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

// Modal analysis of a linearized system: eigenvalues, damping ratios and the
// six-way stability labelling used for the classification datasets.
namespace ssstab::modal {

struct ComplexEigenvalue {
  double sigma = 0.0;  // real part, 1/s
  double omega = 0.0;  // imaginary part, rad/s

  std::complex<double> value() const { return {sigma, omega}; }
  double magnitude() const;

  friend bool operator==(const ComplexEigenvalue&, const ComplexEigenvalue&) = default;
};

enum class StabilityLabel : std::uint8_t {
  satisfactory = 0,
  good = 1,
  acceptable = 2,
  critical = 3,
  unstable = 4,
  irrelevant = 5,
};

inline constexpr std::size_t kLabelCount = 6;

/// Fixed label order; also the one-hot column order and the vote tie-break order.
inline constexpr std::array<StabilityLabel, kLabelCount> kLabelOrder = {
    StabilityLabel::satisfactory, StabilityLabel::good,     StabilityLabel::acceptable,
    StabilityLabel::critical,     StabilityLabel::unstable, StabilityLabel::irrelevant};

constexpr std::size_t label_index(StabilityLabel label) { return static_cast<std::size_t>(label); }
StabilityLabel label_from_index(std::size_t index);
std::string_view label_name(StabilityLabel label);
StabilityLabel parse_label(std::string_view name);

/// Damping-ratio cut points in percent.
struct LabelThresholds {
  double critical_max_pct = 3.0;
  double acceptable_max_pct = 5.0;
  double good_max_pct = 10.0;
  bool irrelevant_is_real_axis = true;

  void validate() const;
};

/// One dataset row: a normalized eigenvalue with its damping ratio and label.
struct DampingRecord {
  ComplexEigenvalue eig;
  double zeta_pct = 0.0;
  StabilityLabel label = StabilityLabel::critical;
  std::int64_t scenario_id = 0;
};

/// All eigenvalues of a real square matrix (dimension <= 64), with multiplicity.
/// Complex pairs are exact conjugates. Sorted by descending real part, then
/// descending imaginary part.
std::vector<ComplexEigenvalue> eigenvalues(const Eigen::MatrixXd& a);

/// Companion matrix of a polynomial given in ascending powers. Leading zeros are dropped.
Eigen::MatrixXd companion_matrix(std::span<const double> ascending);

/// Roots via the companion-matrix eigenproblem; same ordering as eigenvalues().
std::vector<ComplexEigenvalue> polynomial_roots(std::span<const double> ascending);

/// Returned by damping_ratio() for the eigenvalue at the origin.
inline constexpr double kAtOrigin = std::numeric_limits<double>::quiet_NaN();

/// 100 * (-sigma) / |lambda|, in percent. kAtOrigin (NaN) when lambda == 0.
double damping_ratio(ComplexEigenvalue eig);

/// Radial projection of |lambda| > 1 onto the unit circle; others pass through.
ComplexEigenvalue normalize(ComplexEigenvalue eig);
std::vector<ComplexEigenvalue> normalize_eigs(std::span<const ComplexEigenvalue> eigs);

StabilityLabel classify(ComplexEigenvalue eig, const LabelThresholds& thresholds = {});

/// Normalizes, computes the damping ratio and labels in one go.
DampingRecord make_record(ComplexEigenvalue raw, const LabelThresholds& thresholds,
                          std::int64_t scenario_id);

/// Sets components with magnitude <= tol to exactly zero (removes round-off
/// from structurally zero modes, such as the angle-reference mode).
std::vector<ComplexEigenvalue> snap_small(std::span<const ComplexEigenvalue> eigs, double tol);

}  // namespace ssstab::modal
