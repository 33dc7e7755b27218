#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using ld = long double;
using cld = std::complex<long double>;

/// Binomial table by Pascal's rule; row n holds C(n, 0..n).
inline std::vector<std::vector<std::uint64_t>> pascal(int n_max) {
  std::vector<std::vector<std::uint64_t>> t(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    auto& row = t[static_cast<std::size_t>(n)];
    row.assign(static_cast<std::size_t>(n) + 1, 1);
    for (int k = 1; k < n; ++k) {
      const auto& up = t[static_cast<std::size_t>(n) - 1];
      row[static_cast<std::size_t>(k)] = up[static_cast<std::size_t>(k) - 1] + up[static_cast<std::size_t>(k)];
    }
  }
  return t;
}

/// Householder reduction to upper Hessenberg form in extended precision.
inline std::vector<std::vector<ld>> hessenberg(const Eigen::MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::vector<ld>> h(n, std::vector<ld>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h[i][j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  for (std::size_t k = 0; k + 2 < n; ++k) {
    ld alpha = 0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += h[i][k] * h[i][k];
    alpha = std::sqrt(alpha);
    if (alpha == 0) continue;
    if (h[k + 1][k] > 0) alpha = -alpha;
    std::vector<ld> v(n, 0);
    v[k + 1] = h[k + 1][k] - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = h[i][k];
    ld vv = 0;
    for (std::size_t i = k + 1; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {  // H <- (I - 2vv'/v'v) H
      ld s = 0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h[i][j];
      s = 2 * s / vv;
      for (std::size_t i = k + 1; i < n; ++i) h[i][j] -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {  // H <- H (I - 2vv'/v'v)
      ld s = 0;
      for (std::size_t j = k + 1; j < n; ++j) s += h[i][j] * v[j];
      s = 2 * s / vv;
      for (std::size_t j = k + 1; j < n; ++j) h[i][j] -= s * v[j];
    }
  }
  return h;
}

/// Monic characteristic polynomial det(xI - A), ascending coefficients,
/// via the La Budde recurrence on the Hessenberg form.
inline std::vector<ld> char_poly(const Eigen::MatrixXd& a) {
  const auto h = hessenberg(a);
  const std::size_t n = h.size();
  std::vector<std::vector<ld>> p(n + 1);
  p[0] = {1};
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<ld> cur(i + 1, 0);
    const ld hii = h[i - 1][i - 1];
    for (std::size_t d = 0; d < p[i - 1].size(); ++d) {
      cur[d + 1] += p[i - 1][d];
      cur[d] -= hii * p[i - 1][d];
    }
    ld prod = 1;
    for (std::size_t m = 1; m < i; ++m) {
      prod *= h[i - m][i - m - 1];
      const ld coef = h[i - m - 1][i - 1] * prod;
      for (std::size_t d = 0; d < p[i - m - 1].size(); ++d) cur[d] -= coef * p[i - m - 1][d];
    }
    p[i] = std::move(cur);
  }
  return p[n];
}

inline cld horner(const std::vector<ld>& asc, cld z) {
  cld acc = 0;
  for (std::size_t i = asc.size(); i-- > 0;) acc = acc * z + asc[i];
  return acc;
}

inline cld horner_derivative(const std::vector<ld>& asc, cld z) {
  cld acc = 0;
  for (std::size_t i = asc.size(); i-- > 1;) acc = acc * z + static_cast<ld>(i) * asc[i];
  return acc;
}

/// Simultaneous Aberth-Ehrlich iteration on a monic polynomial.
inline std::vector<cld> aberth(const std::vector<ld>& asc) {
  const std::size_t n = asc.size() - 1;
  ld bound = 0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, std::abs(asc[i]));
  bound = 1 + bound;  // Cauchy bound
  std::vector<cld> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ld ang = 2 * std::numbers::pi_v<ld> * static_cast<ld>(i) / static_cast<ld>(n) + 0.4L;
    z[i] = std::polar(bound * 0.5L, ang);
  }
  for (int it = 0; it < 2000; ++it) {
    ld worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const cld f = horner(asc, z[i]);
      if (f == cld(0)) continue;
      const cld ratio = f / horner_derivative(asc, z[i]);
      cld s = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += cld(1) / (z[i] - z[j]);
      const cld w = ratio / (cld(1) - ratio * s);
      z[i] -= w;
      worst = std::max(worst, std::abs(w) / std::max<ld>(1, std::abs(z[i])));
    }
    if (worst < 1e-18L) break;
  }
  for (auto& r : z) {  // Newton polish
    for (int k = 0; k < 5; ++k) {
      const cld d = horner_derivative(asc, r);
      if (d == cld(0)) break;
      r -= horner(asc, r) / d;
    }
  }
  return z;
}

/// Minimum-cost perfect matching (Hungarian algorithm); returns assignment[i] = column for row i.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

/// Largest elementwise distance between two multisets after optimal matching.
inline double matched_max_error(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = std::abs(a[i] - b[j]);
  const auto assign = hungarian(cost);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, cost[i][assign[i]]);
  return worst;
}

/// Eigenvalues of A through its characteristic polynomial.
inline std::vector<std::complex<double>> eigen_via_char_poly(const Eigen::MatrixXd& a) {
  std::vector<std::complex<double>> out;
  for (const auto& r : aberth(char_poly(a))) out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  return out;
}

/// Double-loop k-NN vote: rows sorted by (squared distance, index), ties in votes go to the lower label.
inline int knn_brute(const Eigen::MatrixXd& x, const std::vector<int>& y, const Eigen::RowVectorXd& q, int k,
                     int n_labels) {
  std::vector<std::pair<double, std::size_t>> d;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) s += (x(i, j) - q(j)) * (x(i, j) - q(j));
    d.emplace_back(s, static_cast<std::size_t>(i));
  }
  std::sort(d.begin(), d.end());
  std::vector<int> votes(static_cast<std::size_t>(n_labels), 0);
  for (int i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(y[d[static_cast<std::size_t>(i)].second])];
  int best = 0;
  for (int l = 1; l < n_labels; ++l)
    if (votes[static_cast<std::size_t>(l)] > votes[static_cast<std::size_t>(best)]) best = l;
  return best;
}

/// Central difference (f(x + h) - f(x - h)) / 2h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace oracle
