#include <algorithm>
#include <random>

#include "doctest.h"
#include "igac/errors.hpp"
#include "igac/splines.hpp"

using namespace igac;

namespace {

KnotVector kv2() { return KnotVector(2, {0, 0, 0, 0.5, 1, 1, 1}); }

double spline_value(const KnotVector& kv, const Eigen::VectorXd& c, double xi) {
  const auto b = eval_basis(kv, xi, 0);
  double v = 0.0;
  for (int j = 0; j <= kv.degree(); ++j) v += b.ders(0, j) * c(b.first + j);
  return v;
}

KnotVector random_knots(std::mt19937& rng) {
  std::uniform_int_distribution<int> pd(0, kMaxDegree), nd(0, 6);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const int p = pd(rng);
  const int ni = nd(rng);
  std::vector<double> inner;
  for (int i = 0; i < ni; ++i) inner.push_back(u(rng));
  std::sort(inner.begin(), inner.end());
  std::vector<double> k(p + 1, 0.0);
  std::uniform_int_distribution<int> md(1, std::max(1, p - 1));
  for (double t : inner) {
    const int m = md(rng);
    for (int j = 0; j < m; ++j) k.push_back(t);
  }
  k.insert(k.end(), p + 1, 1.0);
  return KnotVector(p, k);
}

}  // namespace

TEST_CASE("find_span follows the half-open rule with right closure") {
  CHECK(find_span(kv2(), 0.25) == 2);
  CHECK(find_span(kv2(), 1.0) == 3);
  CHECK(find_span(KnotVector(1, {0, 0, 1, 1}), 0.0) == 1);
  CHECK_THROWS_AS(find_span(kv2(), 1.5), DomainError);
  CHECK_THROWS_AS(find_span(kv2(), -0.1), DomainError);
}

TEST_CASE("basis values at simple points") {
  auto b = eval_basis(KnotVector(1, {0, 0, 1, 1}), 0.5, 0);
  CHECK(b.ders(0, 0) == doctest::Approx(0.5));
  CHECK(b.ders(0, 1) == doctest::Approx(0.5));

  b = eval_basis(KnotVector(2, {0, 0, 0, 1, 1, 1}), 0.0, 0);
  CHECK(b.ders(0, 0) == 1.0);
  CHECK(b.ders(0, 1) == 0.0);
  CHECK(b.ders(0, 2) == 0.0);
}

TEST_CASE("basis values and derivatives match exact rational recursion") {
  // Exact values of N_{0..2} at 1/4: 1/4, 5/8, 1/8; derivatives -2, 1, 1.
  const auto b = eval_basis(kv2(), 0.25, 1);
  CHECK(b.span == 2);
  CHECK(b.first == 0);
  const double v[3] = {0.25, 0.625, 0.125};
  const double d[3] = {-2.0, 1.0, 1.0};
  for (int j = 0; j < 3; ++j) {
    CHECK(b.ders(0, j) == doctest::Approx(v[j]).epsilon(1e-15));
    CHECK(b.ders(1, j) == doctest::Approx(d[j]).epsilon(1e-14));
  }
}

TEST_CASE("derivatives beyond the degree are zero") {
  const auto b = eval_basis(KnotVector(1, {0, 0, 0.5, 1, 1}), 0.3, 3);
  CHECK(b.ders.rows() == 4);
  CHECK(b.ders.row(2).norm() == 0.0);
  CHECK(b.ders.row(3).norm() == 0.0);
}

TEST_CASE("knot vector validation") {
  CHECK_THROWS(KnotVector(2, {0, 0, 0.5, 1, 1, 1}));  // not open at the start
  CHECK_THROWS(KnotVector(2, {0, 0, 0, 0.6, 0.5, 1, 1, 1}));
  CHECK_THROWS_AS(KnotVector(5, std::vector<double>(12, 0.0)), UnsupportedDegree);
  CHECK(kv2().size() == 4);
  CHECK(kv2().num_elements() == 2);
  CHECK(kv2().is_smooth());
  CHECK_FALSE(KnotVector(2, {0, 0, 0, 0.5, 0.5, 1, 1, 1}).is_smooth());
}

TEST_CASE("refine_uniform") {
  const auto r = refine_uniform(KnotVector(1, {0, 0, 1, 1}), 1);
  CHECK(r.knots() == std::vector<double>{0, 0, 0.5, 1, 1});
  CHECK(refine_uniform(kv2(), 0) == kv2());
  const auto r2 = refine_uniform(kv2(), 2);
  CHECK(r2.num_elements() == 4 * kv2().num_elements());
  CHECK(r2.degree() == 2);
}

TEST_CASE("refined representation reproduces the spline") {
  const KnotVector coarse = kv2();
  const KnotVector fine = refine_uniform(coarse, 2);
  Eigen::MatrixXd c(4, 1);
  c << 0.3, -1.2, 2.5, 0.7;
  KnotVector kv = coarse;
  Eigen::MatrixXd cf = c;
  const auto extra = knot_difference(coarse, fine);
  insert_knots(kv, cf, extra);
  CHECK(kv == fine);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng);
    err = std::max(err, std::abs(spline_value(coarse, c.col(0), x) - spline_value(fine, cf.col(0), x)));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("Bezier degree elevation keeps the curve") {
  KnotVector kv(2, {0, 0, 0, 1, 1, 1});
  Eigen::MatrixXd c(3, 1);
  c << 1.0, -2.0, 4.0;
  const KnotVector k0 = kv;
  const Eigen::MatrixXd c0 = c;
  elevate_bezier(kv, c);
  CHECK(kv.degree() == 3);
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    CHECK(spline_value(kv, c.col(0), x) == doctest::Approx(spline_value(k0, c0.col(0), x)).epsilon(1e-14));
  }
}

TEST_CASE("trim_for_dual") {
  const auto s0 = trim_for_dual(kv2());
  CHECK(s0.degree() == 0);
  CHECK(s0.knots() == std::vector<double>{0, 0.5, 1});
  CHECK(s0.size() == 2);

  const auto s1 = trim_for_dual(KnotVector(3, {0, 0, 0, 0, 0.5, 1, 1, 1, 1}));
  CHECK(s1.degree() == 1);
  CHECK(s1.knots() == std::vector<double>{0, 0, 0.5, 1, 1});
  CHECK(s1.size() == 3);

  const auto single = trim_for_dual(KnotVector(2, {0, 0, 0, 1, 1, 1}));
  CHECK(single.knots() == std::vector<double>{0, 1});
  CHECK(single.size() == 1);

  CHECK_THROWS_AS(trim_for_dual(KnotVector(1, {0, 0, 1, 1})), UnsupportedDegree);
}

TEST_CASE("dual dimension: one constant per element for p=2, elements+1 hats for p=3") {
  for (int n : {1, 3, 8, 17}) {
    std::vector<double> b;
    for (int i = 0; i <= n; ++i) b.push_back(static_cast<double>(i) / n);
    CHECK(trim_for_dual(KnotVector::from_breakpoints(2, b)).size() == n);
    CHECK(trim_for_dual(KnotVector::from_breakpoints(3, b)).size() == n + 1);
  }
}

TEST_CASE("partition of unity and non-negativity on random knot vectors") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst0 = 0.0, worst1 = 0.0, minval = 1.0;
  for (int t = 0; t < 1000; ++t) {
    const KnotVector kv = random_knots(rng);
    const double x = u(rng);
    const auto b = eval_basis(kv, x, 1);
    worst0 = std::max(worst0, std::abs(b.ders.row(0).sum() - 1.0));
    if (kv.degree() >= 1) worst1 = std::max(worst1, std::abs(b.ders.row(1).sum()));
    minval = std::min(minval, b.ders.row(0).minCoeff());
  }
  CHECK(worst0 <= 1e-13);
  CHECK(worst1 <= 1e-10);
  CHECK(minval >= 0.0);
}

TEST_CASE("tensor basis index bijection") {
  TensorBasis tb({kv2(), KnotVector(3, {0, 0, 0, 0, 1, 1, 1, 1}), KnotVector(1, {0, 0, 0.5, 1, 1})});
  CHECK(tb.size() == 4 * 4 * 3);
  for (int f = 0; f < tb.size(); ++f) CHECK(tb.flat(tb.multi(f)) == f);
  CHECK(tb.multi(1)[0] == 1);  // direction 0 runs fastest
  CHECK(tb.num_elements() == 2 * 1 * 2);
}
