#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ssstab {

namespace grid {
struct GridCase;
}

namespace contingency {

using BigInt = boost::multiprecision::cpp_int;

/// A set of simultaneously opened branches. `opened` is kept sorted and unique.
struct Contingency {
  std::vector<std::size_t> opened;

  Contingency() = default;
  explicit Contingency(std::vector<std::size_t> indices);

  std::size_t order() const noexcept { return opened.size(); }
  bool empty() const noexcept { return opened.empty(); }
  bool contains(std::size_t branch) const;

  friend bool operator==(const Contingency&, const Contingency&) = default;
  friend auto operator<=>(const Contingency&, const Contingency&) = default;
};

/// Monte Carlo estimate of an unavailability from 0/1 failure indicators.
struct McEstimate {
  double q_bar = 0.0;
  double sample_variance = 0.0;
  double estimator_variance = 0.0;
  double alpha = 0.0;  // coefficient of variation; +inf when q_bar == 0
  std::size_t n = 0;
};

/// Exact binomial coefficient C(n, k).
BigInt count_combinations(std::int64_t n, std::int64_t k);

/// Number of contingencies of order 1..n-1 over n branches (= 2^n - 2).
BigInt total_scenarios(std::int64_t n);

double poisson_pmf(double lambda, std::int64_t r);

/// Truncated unit-rate Poisson weight per outage order; element i holds w(k = i + 1).
std::vector<double> order_weights(std::int64_t n);

/// Requested draw count per order before capping: round(budget * w(k)).
std::vector<std::uint64_t> order_targets(std::int64_t n, std::uint64_t budget);

/// Lexicographic unranking of a k-subset of {0..n-1}; rank < C(n, k).
std::vector<std::size_t> unrank_subset(std::size_t n, std::size_t k, std::uint64_t rank);

/// Uniform sampling without replacement within each order, weighted across orders.
/// Output is grouped by ascending order and, within one order, by ascending rank.
std::vector<Contingency> sample_contingencies(std::size_t n_branches, std::uint64_t budget,
                                              std::uint64_t seed);
std::vector<Contingency> sample_contingencies(const grid::GridCase& grid_case,
                                              std::uint64_t budget, std::uint64_t seed);

McEstimate mc_estimate(std::span<const int> indicators);

/// ceil((1 - q) / (alpha^2 q)).
std::uint64_t required_samples(double alpha, double q_bar);
/// Small-q approximation 1 / (alpha^2 q).
double required_samples_approx(double alpha, double q_bar);

/// Efficiency ratio (t1 var1) / (t2 var2); below 1 means method 1 is cheaper.
double mc_efficiency(double t1, double var1, double t2, double var2);

/// CSV export: scenario_id,k,opened_indices with ';' between indices. Ids start at 1, as in gen-data.
void write_contingency_csv(std::ostream& out, std::span<const Contingency> scenarios);

}  // namespace contingency
}  // namespace ssstab
