#include <doctest.h>

#include "ptime/fields.hpp"

#include <cmath>
#include <vector>

using namespace ptime;
using V = Vec<double>;
using M = Mat<double>;

namespace {

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

PowerSum<double> g1_ex3() { return {{{1, 0.5}, {1, 1.5}}}; }
PowerSum<double> g2_ex3() { return {{{0.5, 0}, {2, 1}, {1.5, 2}}}; }

}  // namespace

TEST_CASE("signed power") {
  CHECK(signed_power(-4.0, 0.5) == doctest::Approx(-2.0));
  CHECK(signed_power(0.0, 0.0) == 0.0);
  CHECK(signed_power(-2.0, 1.5) == doctest::Approx(-2.828427).epsilon(1e-6));
  CHECK(signed_power(3.0, 0.0) == 1.0);
  CHECK(signed_power(-3.0, 0.0) == -1.0);
  CHECK(signed_power(-3.5, 1.0) == -3.5);
  for (double x : {0.1, 1.0, 7.3})
    for (double a : {0.0, 1.0 / 3, 0.5, 2.0}) CHECK(signed_power(-x, a) == -signed_power(x, a));
}

TEST_CASE("drift G") {
  const double L = 2.2;
  const DriftG<double> g(vec({-2 * std::cbrt(L), -2.12 * std::pow(L, 2.0 / 3), -1.1 * L}), 1.0);
  const V at1 = eval_G(g, 1.0);
  CHECK(at1(0) == doctest::Approx(-2 * std::cbrt(2.2)));
  CHECK(at1(1) == doctest::Approx(-2.12 * std::pow(2.2, 2.0 / 3)));
  CHECK(at1(2) == doctest::Approx(-2.42));
  CHECK(eval_G(g, 0.0).isZero());
  // Exponents (n - i m)/n: 2/3, 1/3, 0.
  const V at8 = g(8.0);
  CHECK(at8(0) == doctest::Approx(-2 * std::cbrt(L) * 4));
  CHECK(at8(1) == doctest::Approx(-2.12 * std::pow(L, 2.0 / 3) * 2));
  CHECK(at8(2) == doctest::Approx(-1.1 * L));

  const DriftG<double> lin(vec({-3, -2}), 0.0);
  CHECK(lin(2.0)(0) == doctest::Approx(-6));
  CHECK(lin(2.0)(1) == doctest::Approx(-4));
  CHECK_THROWS(DriftG<double>(vec({3, -2}), 0.0));
  CHECK_THROWS(DriftG<double>(vec({-3, -2}), 1.5));
}

TEST_CASE("linear and HOSM fields") {
  const auto lin = CorrectionField<double>::linear(vec({-2, -1}));
  const V f = eval_F(lin, 3.0);
  CHECK(f(0) == -6.0);
  CHECK(f(1) == -3.0);
  CHECK_THROWS(CorrectionField<double>::linear(vec({2, -1})));
  CHECK_THROWS(CorrectionField<double>::linear(vec({-2, -1}), -1.0));

  const double L = 2.2;
  const auto hosm =
      CorrectionField<double>::hosm(vec({-2 * std::cbrt(L), -2.12 * std::pow(L, 2.0 / 3), -1.1 * L}));
  const V h = hosm(-1.0);
  CHECK(h(0) == doctest::Approx(2 * std::cbrt(2.2)));
  CHECK(h(1) == doctest::Approx(2.12 * std::pow(2.2, 2.0 / 3)));
  CHECK(h(2) == doctest::Approx(2.42));
  for (double z : {0.3, 2.0, 50.0}) CHECK((hosm(-z) + hosm(z)).isZero(0));
}

TEST_CASE("canonical transform small cases") {
  const auto one = build_canonical_transform<double>(1, 2.0);
  CHECK(one.gamma(0, 0) == 0.0);
  CHECK(one.a(0) == 0.0);
  CHECK(one.q(0, 0) == doctest::Approx(1.0));

  const auto two = build_canonical_transform<double>(2, 1.0);
  M gamma(2, 2);
  gamma << 0, 1, 0, -1;
  CHECK(two.gamma.isApprox(gamma));
  CHECK(two.a(0) == doctest::Approx(1.0));
  CHECK(two.a(1) == doctest::Approx(0.0));
  M q(2, 2);
  q << 1, 0, -1, 1;
  CHECK((two.q - q).cwiseAbs().maxCoeff() < 1e-14);

  const auto three = build_canonical_transform<double>(3, 1.0);
  CHECK(three.a(0) == doctest::Approx(3.0));
  CHECK(three.a(1) == doctest::Approx(2.0));
  CHECK(three.a(2) == doctest::Approx(0.0));

  CHECK_THROWS(build_canonical_transform<double>(2, 0.0));
  CHECK_THROWS(build_canonical_transform<double>(0, 1.0));
}

TEST_CASE("canonical transform reaches observer form") {
  for (int n = 1; n <= 6; ++n) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      const auto t = build_canonical_transform<double>(n, alpha);
      // Characteristic polynomial coefficients by an independent route: Gamma is
      // upper triangular with eigenvalues 0, -alpha, ..., -(n-1) alpha.
      Eigen::VectorXd poly = Eigen::VectorXd::Zero(n + 1);
      poly(0) = 1;
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n + 1);
        for (int k = 0; k <= j; ++k) {
          next(k) += poly(k);
          next(k + 1) += alpha * j * poly(k);
        }
        poly = next;
      }
      for (int i = 0; i < n; ++i) CHECK(t.a(i) == doctest::Approx(poly(i + 1)).epsilon(1e-12));

      const M qinv = t.q.inverse();
      const M form = qinv * t.gamma * t.q;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double expected = 0;
          if (j == 0) expected = -t.a(i);
          if (j == i + 1) expected += 1;
          CHECK(std::abs(form(i, j) - expected) <= 1e-10 * std::max(1.0, std::abs(t.a(i))));
        }
      }
      const V d = input_vector<double>(n);
      CHECK((qinv * d - d).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("canonical composite field of the second-order example") {
  const auto f = CorrectionField<double>::canonical(vec({-2 * std::sqrt(3.0), -6}), {g1_ex3(), g2_ex3()}, 1.0);
  const V at1 = f(1.0);
  // Matrix-multiply oracle: Q [k1 g1 + a1 z, k2 g2 + a2 z] with Q = [[1,0],[-1,1]], a = (1,0).
  const double inner0 = -2 * std::sqrt(3.0) * 2 + 1;
  const double inner1 = -6 * (0.5 + 2 + 1.5);
  CHECK(at1(0) == doctest::Approx(inner0));
  CHECK(at1(1) == doctest::Approx(-inner0 + inner1));
  CHECK(at1(0) == doctest::Approx(-4 * std::sqrt(3.0) + 1));
  CHECK(inner1 == -24.0);
  for (double z : {0.2, 1.0, 30.0}) CHECK((f(-z) + f(z)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f(0.0).isZero(0));
}

TEST_CASE("canonical field with a g-family switch") {
  PowerSum<double> early{{{1, 1.0}}};
  PowerSum<double> late{{{2, 1.0}}};
  CorrectionField<double>::LateFamily lf{3.0, {late, late}};
  const auto f = CorrectionField<double>::canonical(vec({-1, -1}), {early, early}, 1.0, 1.0, lf);
  REQUIRE(f.switch_tau());
  CHECK(*f.switch_tau() == 3.0);
  const V before = f(1.0, 2.9);
  const V after = f(1.0, 3.0);
  CHECK(before(0) == doctest::Approx(-1 + 1));
  CHECK(after(0) == doctest::Approx(-2 + 1));
  CHECK_THROWS(CorrectionField<double>::canonical(vec({-1, -1}), {early}, 1.0));
}

TEST_CASE("Hurwitz check") {
  M a(2, 2);
  a << -2, 1, -1, 0;
  CHECK(is_hurwitz(a));
  a << 0, 1, 0, 0;
  CHECK_FALSE(is_hurwitz(a));
}
