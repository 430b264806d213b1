#include <doctest.h>

#include "ptime/simulate.hpp"

#include <cmath>
#include <limits>

using namespace ptime;
using V = Vec<double>;
using Profile = BlowUpProfile<double>;

namespace {

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SystemPair<double> hosm2(double t0 = 0.0) {
  const double L = 2.0;
  V l = vec({-1.5 * std::sqrt(L), -1.1 * L});
  return SystemPair<double>(Profile(Profile::Rational{}, 1, std::numeric_limits<double>::infinity(), 100),
                            CorrectionField<double>::hosm(l), DriftG<double>(l, 1.0), L, t0);
}

}  // namespace

TEST_CASE("constant trajectory for a zero field") {
  StepPolicy<double> policy;
  policy.h = 0.1;
  const auto traj = integrate([](double, const V& x) { return V(V::Zero(x.size())); }, vec({1, 2}), 0.0, 1.0, policy);
  REQUIRE(traj.size() == 11);
  for (const auto& x : traj.states) CHECK((x - vec({1, 2})).isZero(0));
  CHECK(traj.times.back() == 1.0);
}

TEST_CASE("RK4 on exponential decay") {
  StepPolicy<double> policy;
  policy.method = Method::RK4;
  policy.h = 0.01;
  const auto traj = integrate([](double, const V& x) { return V(-x); }, vec({1}), 0.0, 1.0, policy);
  CHECK(std::abs(traj.states.back()(0) - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("step halving convergence orders") {
  auto rhs = [](double, const V& x) {
    V out(2);
    out << x(1), -2 * x(0) - x(1);
    return out;
  };
  auto final_state = [&](Method m, double h) {
    StepPolicy<double> p;
    p.method = m;
    p.h = h;
    return integrate(rhs, vec({1, 0}), 0.0, 1.0, p).states.back();
  };
  // Reference from a much finer RK4 run.
  const V ref = final_state(Method::RK4, 1e-4);
  const double e1 = (final_state(Method::Euler, 1e-3) - ref).norm();
  const double e2 = (final_state(Method::Euler, 5e-4) - ref).norm();
  CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.05));
  const double r1 = (final_state(Method::RK4, 0.1) - ref).norm();
  const double r2 = (final_state(Method::RK4, 0.05) - ref).norm();
  CHECK(r2 / r1 == doctest::Approx(1.0 / 16).epsilon(0.15));
}

TEST_CASE("divergence guard") {
  StepPolicy<double> policy;
  policy.h = 0.01;
  try {
    integrate([](double, const V& x) { return V(100 * x); }, vec({1}), 0.0, 10.0, policy);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.last_valid_time() > 0.0);
    CHECK(e.last_valid_time() < 1.0);
  }
  CHECK_THROWS_AS(integrate([](double, const V& x) { return V(x * std::numeric_limits<double>::quiet_NaN()); },
                            vec({1}), 0.0, 1.0, policy),
                  DivergenceError);
}

TEST_CASE("policy contracts") {
  StepPolicy<double> policy;
  policy.h = 0;
  CHECK_THROWS(integrate([](double, const V& x) { return x; }, vec({1}), 0.0, 1.0, policy));
  policy.h = 0.1;
  CHECK_THROWS(integrate([](double, const V& x) { return x; }, vec({1}), 1.0, 1.0, policy));
  policy.stride = 0;
  CHECK_THROWS(policy.validate());
}

TEST_CASE("effective step") {
  StepPolicy<double> p;
  p.h = 1e-3;
  CHECK(p.effective_step(5) == 1e-3);
  CHECK(p.effective_step(100) == doctest::Approx(1e-4));
  p.kappa_power = 2;
  CHECK(p.effective_step(100) == doctest::Approx(1e-5));
}

TEST_CASE("stride and event nodes") {
  StepPolicy<double> policy;
  policy.h = 0.01;
  policy.stride = 10;
  const double nodes[] = {0.333};
  const auto traj = integrate([](double, const V& x) { return V(-x); }, vec({1}), 0.0, 1.0, policy,
                              [](double) { return 1.0; }, std::span<const double>(nodes));
  // 0, 0.1, ..., 1.0 plus the event node.
  CHECK(traj.size() == 12);
  bool found = false;
  for (double t : traj.times) found = found || t == 0.333;
  CHECK(found);
  for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
}

TEST_CASE("switch instant is a recorded node and gains match kappa") {
  auto sp = hosm2();
  sp = SystemPair<double>(Profile(Profile::Exponential{1}, 1, std::log(2.0), 100), sp.field, sp.drift, sp.L, 0.0);
  StepPolicy<double> policy;
  policy.h = 1e-3;
  policy.stride = 7;
  const auto traj = simulate(sp, vec({1, 0}), 1.0, policy);
  bool found = false;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    found = found || traj.times[k] == sp.profile.switch_time();
    CHECK(traj.gains[k] == sp.profile.kappa(traj.times[k] - sp.t0));
  }
  CHECK(found);
}

TEST_CASE("t0 invariance") {
  StepPolicy<double> policy;
  policy.h = 1e-4;
  policy.stride = 50;
  policy.kappa_power = 2;
  const auto a = simulate(hosm2(0.0), vec({5, 0}), 2.0, policy);
  const auto b = simulate(hosm2(3.25), vec({5, 0}), 2.0, policy);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(b.times[k] - a.times[k] == doctest::Approx(3.25).epsilon(1e-12));
    CHECK((a.states[k] - b.states[k]).isZero(0));
    CHECK(a.gains[k] == b.gains[k]);
  }
}

TEST_CASE("harmonic signal derivatives") {
  // y = -0.4 sin t + 0.8 cos 0.8 t
  HarmonicSignal<double> y{{{-0.4, 1.0, -std::numbers::pi / 2}, {0.8, 0.8, 0.0}}};
  for (double t : {0.0, 0.7, 3.1}) {
    CHECK(y(t) == doctest::Approx(-0.4 * std::sin(t) + 0.8 * std::cos(0.8 * t)));
    CHECK(y.derivative(t, 1) == doctest::Approx(-0.4 * std::cos(t) - 0.64 * std::sin(0.8 * t)));
    CHECK(y.derivative(t, 2) == doctest::Approx(0.4 * std::sin(t) - 0.512 * std::cos(0.8 * t)));
    CHECK(y.derivative(t, 3) == doctest::Approx(0.4 * std::cos(t) + 0.4096 * std::sin(0.8 * t)));
  }
  CHECK(y.derivative_bound(2) == doctest::Approx(0.4 + 0.512));
}

TEST_CASE("disturbance sampling") {
  DisturbanceSignal<double> zero;
  CHECK(sample_disturbance(zero, 12.0) == 0.0);

  DisturbanceSignal<double> d2;
  d2.kind = DisturbanceSignal<double>::DerivativeOfSignal{
      HarmonicSignal<double>{{{-0.4, 1.0, -std::numbers::pi / 2}, {0.8, 0.8, 0.0}}}, 2};
  d2.bound = 1.0;
  CHECK(sample_disturbance(d2, 0.0) == doctest::Approx(-0.512).epsilon(1e-12));

  DisturbanceSignal<double> h;
  h.kind = DisturbanceSignal<double>::Harmonic{HarmonicSignal<double>{{{2.5, 1.3, 0.0}}}};
  h.bound = 2.5;
  CHECK(sample_disturbance(h, 0.0) == 2.5);
  h.bound = 2.4;
  CHECK_THROWS_AS(sample_disturbance(h, 0.0), BoundViolation);
}

TEST_CASE("second-order example settles before T_c") {
  // Canonical field, exponential profile, x(0) = (100, 0), zero disturbance.
  PowerSum<double> g1{{{1, 0.5}, {1, 1.5}}};
  PowerSum<double> g2{{{0.5, 0}, {2, 1}, {1.5, 2}}};
  const SystemPair<double> sp(Profile(Profile::Exponential{1}, 1, 233.7349, 1e3),
                              CorrectionField<double>::canonical(vec({-2 * std::sqrt(3.0), -6}), {g1, g2}, 1.0),
                              DriftG<double>(vec({-1.5 * std::sqrt(2.5), -1.1 * 2.5}), 1.0), 2.5);
  StepPolicy<double> policy;
  policy.h = 1e-5;
  policy.kappa_power = 2;
  policy.stride = 100;
  const auto traj = simulate(sp, vec({100, 0}), 10.0, policy);
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (traj.times[k] >= 1.0) CHECK(traj.states[k].lpNorm<Eigen::Infinity>() < 1e-2);
}
