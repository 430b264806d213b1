#include <doctest.h>

#include "ptime/redesign.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace ptime;
using V = Vec<double>;
using Profile = BlowUpProfile<double>;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::numbers::pi;

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SystemPair<double> linear_pair(Profile p, double r = 1.0, double L = 3.0, double t0 = 0.0) {
  return SystemPair<double>(std::move(p), CorrectionField<double>::linear(vec({-2, -1}), r),
                            DriftG<double>(vec({-2, -1}), 0.0), L, t0);
}

}  // namespace

TEST_CASE("system pair contracts") {
  Profile p(Profile::Exponential{1}, 1);
  CHECK_THROWS(SystemPair<double>(p, CorrectionField<double>::linear(vec({-2, -1})),
                                  DriftG<double>(vec({-3, -3, -1}), 0.0), 1.0));
  CHECK_THROWS(linear_pair(p, 1.0, -1.0));
  CHECK_THROWS(linear_pair(p, 1.0, kInf));
}

TEST_CASE("auxiliary right-hand side") {
  const auto sp = linear_pair(Profile(Profile::Exponential{1}, 1));
  CHECK(aux_rhs(sp, 0.7, vec({0, 0}), 0.0).isZero(0));

  const V out = aux_rhs(sp, 0.0, vec({1, 0}), 0.0);
  CHECK(out(0) == doctest::Approx(-2));
  CHECK(out(1) == doctest::Approx(-1));

  // Matrix-form oracle r F(z1) + (r A0 - alpha M) z, evaluated at a generic state.
  const double r = 1.7, tau = 0.4;
  const auto sp2 = linear_pair(Profile(Profile::Exponential{1}, 1), r);
  const V z = vec({0.3, -1.2});
  Mat<double> a(2, 2);
  a << 0, r, 0, -1;
  const V oracle = r * vec({-2 * 0.3, -1 * 0.3}) + a * z;
  CHECK((aux_rhs(sp2, tau, z, 0.0) - oracle).cwiseAbs().maxCoeff() < 1e-14);

  const V dist = aux_rhs(sp, 0.0, vec({0, 0}), 2.5);
  CHECK(dist(0) == 0.0);
  CHECK(dist(1) == doctest::Approx(2.5));
  // Disturbance weight (r rho)^{-n} r at r = 1, rho = e^tau.
  const V later = aux_rhs(sp, 1.0, vec({0, 0}), 1.0);
  CHECK(later(1) == doctest::Approx(std::exp(-2.0)));

  CHECK_THROWS_AS(aux_rhs(sp, 0.0, vec({0, 0}), 3.5), ContractViolation);
}

TEST_CASE("aux rhs with the rational profile rate") {
  const auto sp = linear_pair(Profile(Profile::Rational{}, 1));
  const double tau = 2.0;
  const V z = vec({0, 1});
  // -(2 tau / (tau^2 + 1)) * 1 * z2 on the second row.
  CHECK(aux_rhs(sp, tau, z, 0.0)(1) == doctest::Approx(-0.8));
}

TEST_CASE("H branches") {
  const auto sp = linear_pair(Profile(Profile::Rational{}, 1));
  const V h = eval_H(sp, 1.0, 0.0);
  CHECK(h(0) == doctest::Approx(-2 * kPi / 2));
  CHECK(h(1) == doctest::Approx(-kPi * kPi / 4));
  const V terminal = eval_H(sp, 1.0, 1.0);
  CHECK(terminal(0) == -2.0);
  CHECK(terminal(1) == -1.0);
  CHECK(eval_H(sp, 0.0, 0.3).isZero(0));
}

TEST_CASE("H power law in the gain") {
  // kappa(t) = 1 / (T_c - t) for Exponential(1): kappa(0.5) = 2 kappa(0) for T_c = 1.
  const double L = 1.0;
  const auto hosm = CorrectionField<double>::hosm(vec({-1.5, -1.2, -1.1}));
  const SystemPair<double> sp(Profile(Profile::Exponential{1}, 1), hosm, DriftG<double>(vec({-1, -1, -1}), 1.0), L);
  const V h0 = eval_H(sp, 0.4, 0.0);
  const V h1 = eval_H(sp, 0.4, 0.5);
  for (int i = 0; i < 3; ++i) CHECK(h1(i) == doctest::Approx(h0(i) * std::pow(2.0, i + 1)).epsilon(1e-13));
}

TEST_CASE("redesigned right-hand side") {
  const auto sp = linear_pair(Profile(Profile::Rational{}, 1));
  CHECK(redesigned_rhs(sp, 2.0, vec({0, 0}), 0.0).isZero(0));
  const V out = redesigned_rhs(sp, 0.0, vec({1, 1}), 0.0);
  CHECK(out(0) == doctest::Approx(-kPi + 1));
  CHECK(out(1) == doctest::Approx(-kPi * kPi / 4));
  const V d = redesigned_rhs(sp, 0.0, vec({0, 0}), 0.3);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == doctest::Approx(0.3));
  CHECK_THROWS_AS(redesigned_rhs(sp, 0.0, vec({0, 0}), 3.1), ContractViolation);
}

TEST_CASE("t0 shifts the time base") {
  const auto a = linear_pair(Profile(Profile::Rational{}, 1), 1.0, 3.0, 0.0);
  const auto b = linear_pair(Profile(Profile::Rational{}, 1), 1.0, 3.0, 4.0);
  for (double s : {0.0, 0.3, 0.9, 1.2})
    CHECK((redesigned_rhs(a, s, vec({0.5, -1}), 0.1) - redesigned_rhs(b, 4.0 + s, vec({0.5, -1}), 0.1))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
}

TEST_CASE("switch lands exactly at eta T_c") {
  const auto sp = linear_pair(Profile(Profile::Exponential{1}, 1, std::log(2.0)));
  const double sw = sp.profile.switch_time();
  CHECK(sw == doctest::Approx(0.5));
  const double before = std::nextafter(sw, 0.0);
  CHECK(eval_H(sp, 1.0, before)(0) != -2.0);
  CHECK(eval_H(sp, 1.0, sw)(0) == -2.0);
}

TEST_CASE("coordinate map") {
  const auto sp = linear_pair(Profile(Profile::Exponential{1}, 1), 2.0);
  const V y = aux_to_redesigned(sp, 1.0, vec({3, 5}));
  CHECK(y(0) == 3.0);
  CHECK(y(1) == doctest::Approx(5 * 2 * std::exp(1.0)));
}
