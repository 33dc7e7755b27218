#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssstab/contingency.hpp"

// Network data, admittance assembly and the classical multi-machine
// linearization that produces the system matrix A.
namespace ssstab::grid {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using contingency::Contingency;

struct Bus {
  int id = 0;
  double voltage_kv = 0.0;
  double angle_deg = 0.0;
  double p_gen = 0.0;   // per unit on base_mva
  double q_gen = 0.0;
  double p_load = 0.0;
  double q_load = 0.0;
  bool is_slack = false;
};

struct Branch {
  std::size_t index = 0;
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;        // per unit
  double x = 0.0;        // per unit
  double b_shunt = 0.0;  // total line charging, per unit
  bool is_transformer = false;
};

struct Generator {
  int bus = 0;
  double inertia_h = 0.0;     // s
  double damping_d = 0.0;     // pu torque / pu speed
  double xd_transient = 0.0;  // pu
  double emf_mag = 0.0;       // pu, set from the healthy operating point
  double emf_angle = 0.0;     // rad
};

struct GridCase {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  double base_mva = 100.0;
  double omega_syn = 2.0 * std::numbers::pi * 60.0;
  double length_scale = 1.0;  // multiplies r, x, b as read from file
  double base_kv = 138.0;     // converts voltage_kv to per unit

  void validate() const;
  /// Position of bus `id` in `buses`; ValidationError if absent.
  std::size_t bus_position(int id) const;
  std::complex<double> bus_voltage_pu(std::size_t position) const;
};

struct SystemMatrix {
  Eigen::MatrixXd a;
  std::vector<std::string> state_names;
};

/// Series impedance multiplier applied to opened branches.
inline constexpr double kOpenedImpedanceScale = 1e12;
/// 1-norm condition estimate above which the interior block counts as singular.
inline constexpr double kSingularCondition = 1e12;

/// Reads the sectioned case CSV (#meta, #buses, #branches, #generators),
/// validates it and fills the generator EMFs.
GridCase load_case(const std::filesystem::path& path);
GridCase parse_case(std::istream& in, const std::string& source_name = "<stream>");

/// Path of a case bundled under data/.
std::filesystem::path bundled_case(const std::string& file_name);

/// E = V + j x'd conj(S / V) at each generator bus, from the case's own operating point.
void compute_emfs(GridCase& grid_case);

/// Nodal admittance matrix over the buses (in `buses` order).
CMatrix build_ybus(const GridCase& grid_case, const Contingency& contingency);

/// Bus matrix extended by one internal node per generator behind x'd.
/// Internal nodes follow the buses, in `generators` order.
CMatrix build_augmented_ybus(const GridCase& grid_case, const Contingency& contingency);

/// Constant-admittance load model (P - jQ) / |V|^2 per bus, zero-padded to `size`.
CVector load_admittances(const GridCase& grid_case, std::size_t size);

/// Adds `load_admittances` to the diagonal and eliminates every node not in `keep`.
CMatrix kron_reduce(const CMatrix& ybus, std::span<const std::size_t> keep,
                    const CVector& load_admittances);

/// Connected bus groups (bus ids) with the contingency applied. One group means no islanding.
std::vector<std::vector<int>> islands(const GridCase& grid_case, const Contingency& contingency);

/// dP_e/d(delta) of the reduced network at the given EMFs; rows sum to zero.
Eigen::MatrixXd synchronizing_matrix(const CMatrix& y_reduced, std::span<const double> emf_mag,
                                     std::span<const double> emf_angle);

/// States (delta_1..delta_g, omega_1..omega_g):
/// A = [[0, I], [-(omega_syn / 2H) K, -D / 2H]].
Eigen::MatrixXd classical_state_matrix(const Eigen::MatrixXd& k, std::span<const double> inertia_h,
                                       std::span<const double> damping_d, double omega_syn);

/// Full chain: islanding check, augmented Y-bus, Kron reduction, linearization.
/// Throws SingularInteriorError for islanding contingencies.
SystemMatrix linearize_classical(const GridCase& grid_case, const Contingency& contingency);

}  // namespace ssstab::grid
