#include "ssstab/contingency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "ssstab/errors.hpp"
#include "ssstab/grid.hpp"
#include "ssstab/rng.hpp"

namespace ssstab::contingency {

Contingency::Contingency(std::vector<std::size_t> indices) : opened(std::move(indices)) {
  std::sort(opened.begin(), opened.end());
  opened.erase(std::unique(opened.begin(), opened.end()), opened.end());
}

bool Contingency::contains(std::size_t branch) const {
  return std::binary_search(opened.begin(), opened.end(), branch);
}

BigInt count_combinations(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) {
    throw DomainError("count_combinations: require 0 <= k <= n (n=" + std::to_string(n) +
                      ", k=" + std::to_string(k) + ")");
  }
  k = std::min(k, n - k);
  BigInt c = 1;
  // c stays integral: after step i it equals C(n - k + i, i).
  for (std::int64_t i = 1; i <= k; ++i) {
    c *= (n - k + i);
    c /= i;
  }
  return c;
}

BigInt total_scenarios(std::int64_t n) {
  if (n < 2) throw DomainError("total_scenarios: need n >= 2");
  BigInt total = 0;
  for (std::int64_t k = 1; k <= n - 1; ++k) total += count_combinations(n, k);
  return total;
}

double poisson_pmf(double lambda, std::int64_t r) {
  if (!(lambda > 0.0) || !std::isfinite(lambda) || r < 0) {
    throw DomainError("poisson_pmf: need lambda > 0 and r >= 0");
  }
  if (r > 20) {
    const double rd = static_cast<double>(r);
    return std::exp(-lambda + rd * std::log(lambda) - std::lgamma(rd + 1.0));
  }
  double term = std::exp(-lambda);
  for (std::int64_t i = 1; i <= r; ++i) term *= lambda / static_cast<double>(i);
  return term;
}

std::vector<double> order_weights(std::int64_t n) {
  if (n < 2) throw DomainError("order_weights: need n >= 2");
  std::vector<double> inv_fact(static_cast<std::size_t>(n - 1));
  double f = 1.0;
  for (std::int64_t k = 1; k <= n - 1; ++k) {
    f /= static_cast<double>(k);
    inv_fact[static_cast<std::size_t>(k - 1)] = f;
  }
  // Sum smallest terms first.
  double norm = 0.0;
  for (auto it = inv_fact.rbegin(); it != inv_fact.rend(); ++it) norm += *it;
  for (double& w : inv_fact) w /= norm;
  return inv_fact;
}

std::vector<std::uint64_t> order_targets(std::int64_t n, std::uint64_t budget) {
  const auto w = order_weights(n);
  std::vector<std::uint64_t> targets(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    targets[i] = static_cast<std::uint64_t>(std::llround(static_cast<double>(budget) * w[i]));
  }
  return targets;
}

namespace {

// C(n, k) for n <= 64, zero when k > n. Intermediates fit in 128 bits.
std::uint64_t choose_u64(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return static_cast<std::uint64_t>(c);
}

}  // namespace

std::vector<std::size_t> unrank_subset(std::size_t n, std::size_t k, std::uint64_t rank) {
  if (k > n || n > 64 || rank >= choose_u64(n, k)) {
    throw DomainError("unrank_subset: rank out of range");
  }
  std::vector<std::size_t> subset;
  subset.reserve(k);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < k; ++slot) {
    // Skip first elements while the block of subsets starting with them lies below `rank`.
    for (;; ++next) {
      const std::size_t remaining = k - slot - 1;
      const std::uint64_t block = choose_u64(n - next - 1, remaining);
      if (rank < block) break;
      rank -= block;
    }
    subset.push_back(next++);
  }
  return subset;
}

std::vector<Contingency> sample_contingencies(std::size_t n_branches, std::uint64_t budget,
                                              std::uint64_t seed) {
  if (budget < 1) throw DomainError("sample_contingencies: budget must be >= 1");
  if (n_branches < 2 || n_branches > 64) {
    throw DomainError("sample_contingencies: branch count must be in [2, 64]");
  }
  const auto n = static_cast<std::int64_t>(n_branches);
  const auto targets = order_targets(n, budget);
  std::vector<Contingency> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::size_t k = i + 1;
    const std::uint64_t total = choose_u64(n_branches, k);
    const std::uint64_t m = std::min(targets[i], total);
    if (m == 0) continue;

    // Sparse Fisher-Yates over the virtual rank array [0, total).
    Rng rng(sub_seed(seed, k));
    std::unordered_map<std::uint64_t, std::uint64_t> swapped;
    auto at = [&](std::uint64_t idx) {
      auto it = swapped.find(idx);
      return it == swapped.end() ? idx : it->second;
    };
    std::vector<std::uint64_t> ranks(m);
    for (std::uint64_t d = 0; d < m; ++d) {
      const std::uint64_t j = d + rng.below(total - d);
      const std::uint64_t vj = at(j);
      swapped[j] = at(d);
      ranks[d] = vj;
    }
    std::sort(ranks.begin(), ranks.end());
    for (const auto r : ranks) out.emplace_back(unrank_subset(n_branches, k, r));
  }
  return out;
}

std::vector<Contingency> sample_contingencies(const grid::GridCase& grid_case,
                                              std::uint64_t budget, std::uint64_t seed) {
  return sample_contingencies(grid_case.branches.size(), budget, seed);
}

McEstimate mc_estimate(std::span<const int> indicators) {
  if (indicators.empty()) throw DomainError("mc_estimate: empty indicator vector");
  std::size_t failures = 0;
  for (const int x : indicators) {
    if (x != 0 && x != 1) throw DomainError("mc_estimate: indicators must be 0 or 1");
    failures += static_cast<std::size_t>(x);
  }
  McEstimate est;
  est.n = indicators.size();
  est.q_bar = static_cast<double>(failures) / static_cast<double>(est.n);
  est.sample_variance = est.q_bar - est.q_bar * est.q_bar;
  est.estimator_variance = est.sample_variance / static_cast<double>(est.n);
  est.alpha = est.q_bar == 0.0 ? std::numeric_limits<double>::infinity()
                               : std::sqrt(est.estimator_variance) / est.q_bar;
  return est;
}

std::uint64_t required_samples(double alpha, double q_bar) {
  if (!(alpha > 0.0) || !(q_bar > 0.0) || !(q_bar < 1.0)) {
    throw DomainError("required_samples: need alpha > 0 and 0 < q_bar < 1");
  }
  const double x = (1.0 - q_bar) / (alpha * alpha * q_bar);
  const double nearest = std::round(x);
  // Absorbs representation error in exact quotients.
  if (std::abs(x - nearest) <= 1e-9 * x) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

double required_samples_approx(double alpha, double q_bar) {
  if (!(alpha > 0.0) || !(q_bar > 0.0) || !(q_bar < 1.0)) {
    throw DomainError("required_samples_approx: need alpha > 0 and 0 < q_bar < 1");
  }
  return 1.0 / (alpha * alpha * q_bar);
}

double mc_efficiency(double t1, double var1, double t2, double var2) {
  if (!(t1 > 0.0) || !(var1 > 0.0) || !(t2 > 0.0) || !(var2 > 0.0)) {
    throw DomainError("mc_efficiency: all inputs must be strictly positive");
  }
  return (t1 * var1) / (t2 * var2);
}

void write_contingency_csv(std::ostream& out, std::span<const Contingency> scenarios) {
  out << "scenario_id,k,opened_indices\n";
  for (std::size_t id = 0; id < scenarios.size(); ++id) {
    const auto& c = scenarios[id];
    out << id + 1 << ',' << c.order() << ',';
    for (std::size_t i = 0; i < c.opened.size(); ++i) {
      if (i) out << ';';
      out << c.opened[i];
    }
    out << '\n';
  }
}

}  // namespace ssstab::contingency
