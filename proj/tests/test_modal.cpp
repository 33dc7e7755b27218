#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ssstab/errors.hpp"
#include "ssstab/modal.hpp"
#include "ssstab/rng.hpp"

using namespace ssstab;
using namespace ssstab::modal;

namespace {

std::vector<std::complex<double>> as_complex(const std::vector<ComplexEigenvalue>& v) {
  std::vector<std::complex<double>> out;
  for (const auto& e : v) out.push_back(e.value());
  return out;
}

}  // namespace

TEST_CASE("eigenvalues of simple matrices") {
  Eigen::MatrixXd d = Eigen::Vector3d(-1, -2, -3).asDiagonal();
  const auto e = eigenvalues(d);
  REQUIRE(e.size() == 3);
  CHECK(e[0].sigma == doctest::Approx(-1));
  CHECK(e[1].sigma == doctest::Approx(-2));
  CHECK(e[2].sigma == doctest::Approx(-3));

  Eigen::Matrix2d rot;
  rot << 0, -1, 1, 0;
  const auto r = eigenvalues(rot);
  REQUIRE(r.size() == 2);
  CHECK(r[0].omega == doctest::Approx(1));
  CHECK(r[1].omega == doctest::Approx(-1));
  CHECK(std::abs(r[0].sigma) < 1e-12);
  CHECK(r[0].sigma == r[1].sigma);

  CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd::Zero(2, 3)), ShapeError);
  CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd::Zero(65, 65)), ShapeError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(eigenvalues(bad), DomainError);
}

TEST_CASE("eigenvalues agree with the characteristic-polynomial oracle") {
  Rng rng(8);
  Eigen::MatrixXd a(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) a(i, j) = rng.uniform(-1, 1);
  const auto ours = eigenvalues(a);
  CHECK(oracle::matched_max_error(as_complex(ours), oracle::eigen_via_char_poly(a)) <= 1e-8);
  // Ordering and exact conjugate pairs.
  for (std::size_t i = 0; i + 1 < ours.size(); ++i) {
    CHECK((ours[i].sigma > ours[i + 1].sigma ||
           (ours[i].sigma == ours[i + 1].sigma && ours[i].omega >= ours[i + 1].omega)));
  }
  for (const auto& e : ours) {
    if (e.omega == 0) continue;
    bool found = false;
    for (const auto& f : ours) found = found || (f.sigma == e.sigma && f.omega == -e.omega);
    CHECK(found);
  }
}

TEST_CASE("polynomial roots and companion matrix") {
  const std::vector<double> p{2, 3, 1};  // (s+1)(s+2)
  const auto r = polynomial_roots(p);
  REQUIRE(r.size() == 2);
  CHECK(r[0].sigma == doctest::Approx(-1));
  CHECK(r[1].sigma == doctest::Approx(-2));
  CHECK(companion_matrix(p).rows() == 2);
  CHECK_THROWS_AS(companion_matrix(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("damping ratio") {
  CHECK(damping_ratio({-1, 0}) == doctest::Approx(100));
  CHECK(damping_ratio({0, 1}) == doctest::Approx(0));
  CHECK(damping_ratio({-1, 1}) == doctest::Approx(70.7107).epsilon(1e-6));
  CHECK(std::isnan(damping_ratio({0, 0})));
  CHECK(damping_ratio({-3, 7}) == doctest::Approx(damping_ratio({-30, 70})).epsilon(1e-14));
}

TEST_CASE("normalize") {
  const auto n = normalize({-3, 4});
  CHECK(n.sigma == doctest::Approx(-0.6));
  CHECK(n.omega == doctest::Approx(0.8));
  const auto in = normalize({-0.1, 0.2});
  CHECK(in.sigma == -0.1);
  CHECK(in.omega == 0.2);
  CHECK(damping_ratio({-3, 4}) == doctest::Approx(damping_ratio(n)).epsilon(1e-14));
  CHECK(std::arg(n.value()) == doctest::Approx(std::arg(std::complex<double>(-3, 4))).epsilon(1e-15));
  const std::vector<ComplexEigenvalue> many{{-3, 4}, {0.5, 0}};
  const auto nn = normalize_eigs(many);
  CHECK(nn[1].sigma == 0.5);
}

TEST_CASE("classify") {
  const LabelThresholds t;
  CHECK(classify({1, 1}, t) == StabilityLabel::unstable);
  CHECK(classify({-0.04, 1}, t) == StabilityLabel::acceptable);
  CHECK(classify({-5, 0}, t) == StabilityLabel::irrelevant);
  CHECK(classify({0, 0}, t) == StabilityLabel::critical);
  CHECK(classify({-0.01, 1}, t) == StabilityLabel::critical);
  CHECK(classify({-0.07, 1}, t) == StabilityLabel::good);
  CHECK(classify({-0.5, 1}, t) == StabilityLabel::satisfactory);
  CHECK(classify({0, 1}, t) == StabilityLabel::critical);
  CHECK(classify({2, 0}, t) == StabilityLabel::unstable);
  LabelThresholds off;
  off.irrelevant_is_real_axis = false;
  CHECK(classify({-5, 0}, off) == StabilityLabel::satisfactory);
  LabelThresholds bad;
  bad.critical_max_pct = 6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("labels round-trip through names and indices") {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    const auto l = label_from_index(i);
    CHECK(label_index(l) == i);
    CHECK(parse_label(label_name(l)) == l);
  }
  CHECK(label_name(StabilityLabel::satisfactory) == "satisfactory");
  CHECK(label_name(StabilityLabel::irrelevant) == "irrelevant");
  CHECK_THROWS_AS(parse_label("stable"), ParseError);
}

TEST_CASE("make_record and snap_small") {
  const auto r = make_record({-30, 40}, {}, 7);
  CHECK(r.eig.sigma == doctest::Approx(-0.6));
  CHECK(r.zeta_pct == doctest::Approx(60));
  CHECK(r.label == StabilityLabel::satisfactory);
  CHECK(r.scenario_id == 7);
  const auto origin = make_record({0, 0}, {}, 1);
  CHECK(origin.label == StabilityLabel::critical);
  CHECK(origin.zeta_pct == 0.0);
  const std::vector<ComplexEigenvalue> v{{1e-15, 2.0}, {-0.3, -1e-14}};
  const auto s = snap_small(v, 1e-9);
  CHECK(s[0].sigma == 0.0);
  CHECK(s[1].omega == 0.0);
  CHECK(s[1].sigma == -0.3);
}
