#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssstab/modal.hpp"

// Labelled eigenvalue datasets: assembly, balancing, encoding, splitting, I/O.
namespace ssstab::dataset {

using modal::DampingRecord;
using modal::StabilityLabel;
using ClassCounts = std::array<std::size_t, modal::kLabelCount>;

struct Dataset {
  Eigen::MatrixXd features;  // N x 2: normalized (re, im)
  std::vector<StabilityLabel> labels;
  std::vector<double> zeta_pct;
  std::vector<std::int64_t> scenario_id;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  ClassCounts class_counts() const;
  /// Rows in the given order.
  Dataset select(std::span<const std::size_t> rows) const;
  void validate() const;
};

struct Split {
  Dataset train;
  Dataset test;
  double train_fraction = 0.75;
  std::vector<std::size_t> train_rows;  // indices into the source
  std::vector<std::size_t> test_rows;
};

Dataset assemble(std::span<const DampingRecord> records);

/// Seeded downsample of every class to the smallest class count. Source order is kept.
Dataset balance(const Dataset& ds, std::uint64_t seed);

std::vector<int> encode_index(std::span<const StabilityLabel> labels);
std::vector<StabilityLabel> decode_index(std::span<const int> indices);
/// N x 6 indicator matrix in the fixed label order.
Eigen::MatrixXd encode_one_hot(std::span<const StabilityLabel> labels);

/// sign(v) ln(1 + |v|) elementwise when enabled; identity otherwise.
Eigen::MatrixXd deskew(const Eigen::MatrixXd& features, bool enabled);

/// Stratified seeded partition; source order is kept inside each part.
Split split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Stratified seeded downsample to round(fraction * N) rows.
Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed);

/// Largest-remainder allocation of round(fraction * total) over class sizes.
std::vector<std::size_t> stratified_quota(std::span<const std::size_t> class_sizes, double fraction);

void write_csv(std::ostream& out, const Dataset& ds);
void write_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_csv(std::istream& in, const std::string& source_name = "<stream>");
Dataset read_csv(const std::filesystem::path& path);

/// Eigenvalues placed uniformly in damping ratio within each label band and
/// log-uniformly in magnitude over [r_min, r_max], then normalized and labelled.
struct SyntheticConfig {
  std::size_t per_class = 3400;
  double r_min = 0.7;
  double r_max = 70.0;
  modal::LabelThresholds thresholds{};
};
std::vector<DampingRecord> synthetic_records(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace ssstab::dataset
