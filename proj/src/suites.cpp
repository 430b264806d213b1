#include "ptime/suites.hpp"

#include "ptime/quadrature.hpp"
#include "ptime/runner.hpp"
#include "ptime/scenario.hpp"
#include "ptime/verify.hpp"

#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

namespace ptime::app {

using nlohmann::json;

namespace {

using Profile = BlowUpProfile<double>;
using V = Vec<double>;
const double kInf = std::numeric_limits<double>::infinity();

struct Suite {
  json checks = json::array();
  bool pass = true;

  void add(const std::string& name, bool ok, json evidence = json::object()) {
    evidence["name"] = name;
    evidence["status"] = ok ? "pass" : "fail";
    checks.push_back(std::move(evidence));
    pass = pass && ok;
  }
};

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(lo * std::pow(hi / lo, double(k) / (count - 1)));
  return out;
}

std::vector<V> axis_inits(int n) {
  std::vector<V> out;
  for (int k = 0; k <= 2; ++k)
    for (double sign : {1.0, -1.0}) {
      V x = V::Zero(n);
      x(0) = sign * std::pow(10.0, k);
      out.push_back(x);
    }
  return out;
}

SystemPair<double> linear_pair(double r, double kappa_max = 1e4) {
  return SystemPair<double>(Profile(Profile::Exponential{1}, 1, kInf, kappa_max),
                            CorrectionField<double>::linear(vec({-2, -1}), r), DriftG<double>(vec({-2, -1}), 0.0), 1.0);
}

SystemPair<double> example_pair(int id) { return build_system(builtin_example(id, false)); }

json sweep_json(const SweepReport<double>& r) {
  json rows = json::array();
  for (const auto& e : r.entries) {
    json row = {{"x1_0", e.x0(0)}, {"pass", e.pass}};
    row["settle_time"] = e.report.settled ? json(e.report.settle_time) : json("not settled");
    if (!e.error.empty()) row["error"] = e.error;
    rows.push_back(row);
  }
  return {{"bound", r.bound}, {"entries", rows}, {"nondecreasing", r.nondecreasing}, {"spread", r.spread}};
}

Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd at = a.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    big.block(i * n, i * n, n, n) += at;
    for (Eigen::Index j = 0; j < n; ++j) big.block(i * n, j * n, n, n) += at(i, j) * Eigen::MatrixXd::Identity(n, n);
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(eye.data(), n * n);
  const Eigen::VectorXd p = big.colPivHouseholderQr().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
}

// ---------------------------------------------------------------------------

Suite profiles_suite() {
  Suite s;
  const Profile kinds[] = {Profile(Profile::Exponential{1}, 1, kInf, kInf), Profile(Profile::Rational{}, 1, kInf, kInf)};
  for (const auto& p : kinds) {
    double reciprocal = 0, composition = 0, quadrature = 0, roundtrip = 0;
    for (double tau : log_grid(1e-6, 50, 200)) {
      reciprocal = std::max(reciprocal, std::abs(p.T_c() * p.rho(tau) * p.phi(tau) - 1));
      if (p.T_c() * p.rho(tau) <= 1e6) {
        composition = std::max(composition, std::abs(p.kappa(p.psi(tau)) - p.rho(tau)) / p.rho(tau));
        roundtrip = std::max(roundtrip, std::abs(p.psi_inv(p.psi(tau)) - tau) / std::max(1.0, tau));
      }
    }
    for (double tau : log_grid(0.05, 20, 40)) {
      const double q = p.T_c() * adaptive_simpson([&](double x) { return p.phi(x); }, 0.0, tau, 1e-13);
      quadrature = std::max(quadrature, std::abs(p.psi(tau) - q) / q);
    }
    const std::string k = p.kind_name();
    s.add(k + ": reciprocal identity", reciprocal <= 1e-12, {{"max_error", reciprocal}, {"tolerance", 1e-12}});
    s.add(k + ": composition identity", composition <= 1e-9, {{"max_rel_error", composition}, {"tolerance", 1e-9}});
    s.add(k + ": psi inverse round trip", roundtrip <= 1e-9, {{"max_error", roundtrip}, {"tolerance", 1e-9}});
    s.add(k + ": psi vs quadrature", quadrature <= 1e-8, {{"max_rel_error", quadrature}, {"tolerance", 1e-8}});
    s.add(k + ": eta(inf) = 1", p.eta_at(kInf) == 1.0);
  }
  double eta_err = 0;
  const Profile e(Profile::Exponential{1}, 1);
  for (double T_f : {std::log(2.0), 5.0}) eta_err = std::max(eta_err, std::abs(e.eta_at(T_f) - (1 - std::exp(-T_f))));
  s.add("exponential eta formula", eta_err <= 2 * std::numeric_limits<double>::epsilon(), {{"max_error", eta_err}});
  const auto choice = choose_alpha_for_slack(1.0, 233.7349, 1.0, 1e-3);
  s.add("slack chooser on T_max* = 233.7349", choice.slack <= 1e-3,
        {{"alpha", choice.alpha}, {"slack", choice.slack}, {"epsilon", 1e-3}});
  return s;
}

Suite equivalence_suite() {
  Suite s;
  const auto lin = linear_pair(3.0, 1e9);
  std::vector<double> grid;
  for (int k = 1; k <= 30; ++k) grid.push_back(lin.profile.psi(3.0) * k / 30);
  StepPolicy<double> policy;
  policy.h = 1e-5;

  const auto zero = equivalence_oracle(lin, vec({0, 0}), 3.0, grid, policy);
  s.add("zero state stays at the origin", zero.max_deviation == 0.0, {{"deviation", zero.max_deviation}});

  const auto fine = equivalence_oracle(lin, vec({1, 0}), 3.0, grid, policy);
  s.add("linear n=2, h=1e-5", fine.max_deviation <= 1e-3, {{"deviation", fine.max_deviation}, {"tolerance", 1e-3}});
  StepPolicy<double> coarse_policy = policy;
  coarse_policy.h = 2e-5;
  const auto coarse = equivalence_oracle(lin, vec({1, 0}), 3.0, grid, coarse_policy);
  const double ratio = fine.max_deviation / coarse.max_deviation;
  s.add("first-order step halving", std::abs(ratio - 0.5) <= 0.1, {{"ratio", ratio}, {"expected", 0.5}});

  const auto ex3 = example_pair(3);
  std::vector<double> g3;
  for (int k = 1; k <= 30; ++k) g3.push_back(ex3.profile.psi(3.0) * k / 30);
  StepPolicy<double> p3 = policy;
  p3.kappa_power = 2;
  auto delta = [&](double t) { return 2.5 * std::cos(ex3.profile.psi_inv(t - ex3.t0)); };
  const auto dist = equivalence_oracle(ex3, vec({10, 0}), 3.0, g3, p3, delta);
  s.add("canonical n=2 with disturbance", dist.max_deviation <= 1e-2,
        {{"deviation", dist.max_deviation}, {"tolerance", 1e-2}});
  return s;
}

Suite ubst_suite() {
  Suite s;
  {
    StepPolicy<double> policy;
    policy.method = Method::RK4;
    policy.h = 1e-5;
    policy.stride = 10;
    const auto r = check_ubst_sweep(linear_pair(4.0), axis_inits(2), 1e-2, 0.5, 2.0, policy);
    s.add("linear field sweep", r.all_pass, sweep_json(r));
    s.add("linear field settle times nondecreasing in |x0|", r.nondecreasing, {{"spread", r.spread}});
  }
  for (int id : {1, 3}) {
    const auto sc = builtin_example(id, false);
    StepPolicy<double> policy = sc.step;
    policy.stride = 10;
    const auto r = check_ubst_sweep(build_system(sc), axis_inits(sc.order()), 1e-2, 0.5, 2.0, policy);
    s.add(std::string(id == 1 ? "HOSM" : "canonical") + " field sweep", r.all_pass, sweep_json(r));
  }
  return s;
}

Suite gains_suite() {
  Suite s;
  const auto sc = builtin_example(3, false);
  const auto run = run_scenario(sc);
  const auto g = check_gain_bound(run.trajectory, build_profile(sc), *sc.T_max_star);
  s.add("canonical example gain below rho(T_max*)", g.status == CheckStatus::Pass,
        {{"max_kappa", g.max_gain}, {"log_bound", g.log_bound}});
  Trajectory<double> flat;
  flat.times = {0, 1};
  flat.states = {vec({0}), vec({0})};
  flat.gains = {1, 1};
  const auto skipped = check_gain_bound(flat, Profile(Profile::Rational{}, 1), 10.0);
  s.add("rational profile with T_f = inf is skipped", skipped.status == CheckStatus::Skipped, {{"note", skipped.note}});
  return s;
}

Suite lyapunov_suite() {
  Suite s;
  std::mt19937 rng(20240601);
  std::normal_distribution<double> normal;
  double worst_residual = 0, worst_oracle = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 4;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
    a -= (eig.eigenvalues().real().maxCoeff() + 0.5) * Eigen::MatrixXd::Identity(n, n);
    const auto sol = lyapunov_solve(a);
    const Eigen::MatrixXd oracle = kronecker_lyapunov(a);
    worst_residual = std::max(worst_residual, sol.residual);
    worst_oracle = std::max(worst_oracle, (sol.P - oracle).cwiseAbs().maxCoeff() / std::max(1.0, oracle.cwiseAbs().maxCoeff()));
  }
  s.add("residual on 20 random stable matrices", worst_residual <= 1e-9, {{"max_residual", worst_residual}});
  s.add("agreement with the Kronecker solve", worst_oracle <= 1e-8, {{"max_rel_difference", worst_oracle}});

  Eigen::MatrixXd a(2, 2);
  a << -2, 1, -1, 0;
  const double r_min = prop3_r_min(a, 2);
  StepPolicy<double> policy;
  policy.method = Method::RK4;
  policy.h = 1e-5;
  policy.stride = 10;
  for (double r : {1.1 * r_min, 0.0}) {
    const auto traj = simulate(linear_pair(r), vec({100, 0}), 2.0, policy);
    const auto rep = estimate_settling_time(traj, 1e-2, 0.5);
    const bool before = rep.settled && rep.settle_time < 1.0;
    json ev = {{"r", r}, {"r_min", r_min}};
    ev["settle_time"] = rep.settled ? json(rep.settle_time) : json("not settled");
    if (r > 0) s.add("r = 1.1 r_min settles before T_c", before, ev);
    else s.add("r = 0 does not settle before T_c", !before, ev);
  }
  return s;
}

Suite lemma4_suite() {
  Suite s;
  const Profile e(Profile::Exponential{1}, 1);
  const auto ok = lemma4_condition(2.5, e, 3, 1.0);
  const auto bad = lemma4_condition(1.5, e, 3, 1.0);
  s.add("c = 2.5 holds", ok.holds, {{"sup_rhs", ok.sup_rhs}, {"asymptote", *ok.asymptote}});
  s.add("c = 1.5 fails", !bad.holds, {{"witness_tau", *bad.witness_tau}, {"witness_value", *bad.witness_value}});
  s.add("asymptote (n-1) alpha = 2", std::abs(*ok.asymptote - 2.0) == 0.0);
  s.add("n = 1 always holds", lemma4_condition(1e-6, e, 1, 1.0).holds);
  return s;
}

const std::vector<std::pair<std::string, std::function<Suite()>>>& registry() {
  static const std::vector<std::pair<std::string, std::function<Suite()>>> r{
      {"profiles", profiles_suite}, {"equivalence", equivalence_suite}, {"ubst", ubst_suite},
      {"gains", gains_suite},       {"lyapunov", lyapunov_suite},       {"lemma4", lemma4_suite}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    out.push_back("all");
    return out;
  }();
  return names;
}

VerifyOutput run_verify(const std::string& suite) {
  std::vector<std::pair<std::string, std::function<Suite()>>> selected;
  for (const auto& entry : registry())
    if (suite == "all" || suite == entry.first) selected.push_back(entry);
  if (selected.empty()) throw std::invalid_argument("unknown verification suite '" + suite + "'");

  std::vector<std::future<Suite>> jobs;
  for (const auto& [_, fn] : selected) jobs.push_back(std::async(std::launch::async, fn));

  VerifyOutput out;
  json suites = json::array();
  for (std::size_t k = 0; k < selected.size(); ++k) {
    json entry = {{"suite", selected[k].first}};
    try {
      Suite s = jobs[k].get();
      entry["checks"] = s.checks;
      entry["pass"] = s.pass;
      out.pass = out.pass && s.pass;
    } catch (const std::exception& e) {
      entry["error"] = e.what();
      entry["pass"] = false;
      out.pass = false;
    }
    suites.push_back(entry);
  }
  out.report = {{"suite", suite}, {"suites", suites}, {"pass", out.pass}};
  return out;
}

}  // namespace ptime::app
