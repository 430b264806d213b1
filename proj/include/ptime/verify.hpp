#pragma once

#include "ptime/fields.hpp"
#include "ptime/profile.hpp"
#include "ptime/redesign.hpp"
#include "ptime/sim.hpp"
#include "ptime/simulate.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptime {

// ---------------------------------------------------------------------------
// Settling time

template <typename Scalar = double>
struct SettlingReport {
  bool settled{false};
  Scalar settle_time{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar epsilon{};
  Scalar dwell{};
  /// Largest sup-norm on [settle_time, t_end]; the final-sample norm if never settled.
  Scalar max_excursion{};
  Scalar t_end{};
};

/// Earliest recorded time after which the sup-norm of the state stays <= epsilon
/// through the end of the trajectory, provided that tail lasts at least `dwell`.
/// `components` restricts the norm to the listed indices when non-empty.
template <typename Scalar>
SettlingReport<Scalar> estimate_settling_time(const Trajectory<Scalar>& traj, Scalar epsilon, Scalar dwell,
                                              const std::vector<int>& components = {}) {
  if (!(epsilon > 0)) throw std::invalid_argument("settling: epsilon must be positive");
  if (traj.size() == 0) throw std::invalid_argument("settling: empty trajectory");
  const Scalar span = traj.times.back() - traj.times.front();
  if (!(dwell >= 0) || dwell > span) throw std::invalid_argument("settling: dwell must lie in [0, span]");

  auto norm = [&](std::size_t k) {
    const auto& x = traj.states[k];
    if (components.empty()) return Scalar(x.template lpNorm<Eigen::Infinity>());
    Scalar m(0);
    for (int c : components) m = std::max(m, Scalar(std::abs(x(c))));
    return m;
  };

  SettlingReport<Scalar> report;
  report.epsilon = epsilon;
  report.dwell = dwell;
  report.t_end = traj.times.back();

  std::size_t first = traj.size();
  Scalar excursion(0);
  while (first > 0 && norm(first - 1) <= epsilon) {
    --first;
    excursion = std::max(excursion, norm(first));
  }
  if (first == traj.size() || report.t_end - traj.times[first] < dwell) {
    report.max_excursion = norm(traj.size() - 1);
    return report;
  }
  report.settled = true;
  report.settle_time = traj.times[first];
  report.max_excursion = excursion;
  return report;
}

// ---------------------------------------------------------------------------
// Change-of-coordinates oracle

template <typename Scalar = double>
struct EquivalenceResult {
  Scalar max_deviation{0};
  Scalar worst_time{0};
  std::size_t compared{0};
};

namespace detail {

template <typename Scalar>
std::size_t find_time(const std::vector<Scalar>& times, Scalar t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it != times.end() && *it == t) return static_cast<std::size_t>(it - times.begin());
  throw std::logic_error("equivalence oracle: comparison node missing from trajectory");
}

}  // namespace detail

/// Integrates the auxiliary system in tau and the redesigned system in t from the
/// mapped initial state, then compares y(psi(tau) + t0) with the rescaled z(tau)
/// on `grid` (elapsed times t - t0). The deviation at each node is
/// |y_mapped - y_direct|_inf / max(1, |y_mapped|_inf).
///
/// `delta` maps absolute time to the disturbance; the auxiliary side receives
/// delta(psi(tau) + t0).
template <typename Scalar, typename Disturbance>
EquivalenceResult<Scalar> equivalence_oracle(const SystemPair<Scalar>& sp, const Vec<Scalar>& z0, Scalar tau_max,
                                             const std::vector<Scalar>& grid, const StepPolicy<Scalar>& policy,
                                             Disturbance&& delta) {
  if (!(tau_max > 0)) throw std::invalid_argument("equivalence oracle: tau_max must be positive");
  const Scalar t_max = sp.profile.psi(tau_max);
  if (!(t_max < sp.profile.switch_time()))
    throw std::domain_error("equivalence oracle: psi(tau_max) must stay below eta*T_c");
  std::vector<Scalar> t_nodes;
  std::vector<Scalar> tau_nodes;
  for (Scalar t : grid) {
    if (!(t > 0) || t > t_max) throw std::domain_error("equivalence oracle: grid node outside (0, psi(tau_max)]");
    t_nodes.push_back(t);
    tau_nodes.push_back(t == t_max ? tau_max : sp.profile.psi_inv(t));
  }

  auto aux = [&](Scalar tau, const Vec<Scalar>& z) {
    return aux_rhs(sp, tau, z, Scalar(delta(sp.profile.psi(tau) + sp.t0)));
  };
  StepPolicy<Scalar> tau_policy = policy;
  tau_policy.stride = std::numeric_limits<int>::max();
  const auto z_traj = integrate(aux, z0, Scalar(0), tau_max, tau_policy, [](Scalar) { return Scalar(1); },
                                std::span<const Scalar>(tau_nodes));

  StepPolicy<Scalar> t_policy = policy;
  t_policy.stride = std::numeric_limits<int>::max();
  const Vec<Scalar> y0 = aux_to_redesigned(sp, Scalar(0), z0);
  auto direct = [&](Scalar s, const Vec<Scalar>& y) {
    return redesigned_rhs_elapsed(sp, s, y, Scalar(delta(sp.t0 + s)));
  };
  auto gain = [&](Scalar s) { return sp.profile.kappa(s); };
  const auto y_traj = integrate(direct, y0, Scalar(0), t_max, t_policy, gain, std::span<const Scalar>(t_nodes));

  EquivalenceResult<Scalar> result;
  for (std::size_t k = 0; k < t_nodes.size(); ++k) {
    const auto& z = z_traj.states[detail::find_time(z_traj.times, tau_nodes[k])];
    const auto& y = y_traj.states[detail::find_time(y_traj.times, t_nodes[k])];
    const Vec<Scalar> mapped = aux_to_redesigned(sp, tau_nodes[k], z);
    const Scalar scale = std::max(Scalar(1), Scalar(mapped.template lpNorm<Eigen::Infinity>()));
    const Scalar dev = (mapped - y).template lpNorm<Eigen::Infinity>() / scale;
    if (dev > result.max_deviation) {
      result.max_deviation = dev;
      result.worst_time = t_nodes[k];
    }
    ++result.compared;
  }
  return result;
}

template <typename Scalar>
EquivalenceResult<Scalar> equivalence_oracle(const SystemPair<Scalar>& sp, const Vec<Scalar>& z0, Scalar tau_max,
                                             const std::vector<Scalar>& grid, const StepPolicy<Scalar>& policy) {
  return equivalence_oracle(sp, z0, tau_max, grid, policy, [](Scalar) { return Scalar(0); });
}

// ---------------------------------------------------------------------------
// Lyapunov equation and the r bound

template <typename Scalar = double>
struct LyapunovSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> P;
  Scalar lambda_max{};
  Scalar residual{};
};

/// Solves P A + A^T P = -I for symmetric P using the n(n+1)/2 upper-triangle unknowns.
template <typename Derived>
LyapunovSolution<typename Derived::Scalar> lyapunov_solve(const Eigen::MatrixBase<Derived>& a_in) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense a = a_in;
  const Eigen::Index n = a.rows();
  if (n < 1 || a.cols() != n) throw std::invalid_argument("lyapunov_solve: A must be square");
  if (!is_hurwitz(a)) throw std::invalid_argument("lyapunov_solve: A is not Hurwitz");

  // Unknown index of P(i, j), i <= j.
  auto id = [n](Eigen::Index i, Eigen::Index j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i - 1) / 2 + (j - i);
  };
  const Eigen::Index m = n * (n + 1) / 2;
  Dense system = Dense::Zero(m, m);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k; l < n; ++l) {
      const Eigen::Index row = id(k, l);
      // (P A)_kl + (A^T P)_kl = sum_j P_kj A_jl + A_jk P_jl
      for (Eigen::Index j = 0; j < n; ++j) {
        system(row, id(k, j)) += a(j, l);
        system(row, id(j, l)) += a(j, k);
      }
      if (k == l) rhs(row) = Scalar(-1);
    }
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = system.fullPivLu().solve(rhs);

  LyapunovSolution<Scalar> out;
  out.P.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.P(i, j) = p(id(i, j));
  Eigen::SelfAdjointEigenSolver<Dense> eig(out.P, Eigen::EigenvaluesOnly);
  out.lambda_max = eig.eigenvalues().maxCoeff();
  const Dense res = out.P * a + a.transpose() * out.P + Dense::Identity(n, n);
  out.residual = res.cwiseAbs().rowwise().sum().maxCoeff();
  return out;
}

/// 2 lambda_max(P) (n - 1): the smallest admissible r for a linear field.
template <typename Derived>
typename Derived::Scalar prop3_r_min(const Eigen::MatrixBase<Derived>& a, int n) {
  using Scalar = typename Derived::Scalar;
  const auto sol = lyapunov_solve(a);
  if (n <= 1) return Scalar(0);
  return 2 * sol.lambda_max * Scalar(n - 1);
}

// ---------------------------------------------------------------------------
// Exponential-decay condition c > (n - 1) log(rho(tau)) / tau for tau >= tau*

template <typename Scalar = double>
struct Lemma4Result {
  bool holds{true};
  /// First grid point where the inequality fails, and its right-hand side.
  std::optional<Scalar> witness_tau;
  std::optional<Scalar> witness_value;
  /// Largest right-hand side over the grid.
  Scalar sup_rhs{-std::numeric_limits<Scalar>::infinity()};
  /// (n - 1) alpha for exponential profiles.
  std::optional<Scalar> asymptote;
};

template <typename Scalar>
Lemma4Result<Scalar> lemma4_condition(Scalar c, const BlowUpProfile<Scalar>& profile, int n, Scalar tau_star,
                                      int samples = 400, Scalar tau_end = Scalar(1e4)) {
  if (!(c > 0)) throw std::invalid_argument("lemma4: c must be positive");
  if (!(tau_star > 0)) throw std::invalid_argument("lemma4: tau* must be positive");
  if (n < 1) throw std::invalid_argument("lemma4: order must be >= 1");
  Lemma4Result<Scalar> out;
  if (auto* e = std::get_if<typename BlowUpProfile<Scalar>::Exponential>(&profile.kind()))
    out.asymptote = Scalar(n - 1) * e->alpha;
  const Scalar hi = std::max(tau_end, tau_star);
  const Scalar step = samples > 1 ? std::log(hi / tau_star) / Scalar(samples - 1) : Scalar(0);
  for (int k = 0; k < samples; ++k) {
    const Scalar tau = tau_star * std::exp(step * Scalar(k));
    const Scalar value = Scalar(n - 1) * profile.log_rho(tau) / tau;
    out.sup_rhs = std::max(out.sup_rhs, value);
    if (!(c > value) && out.holds) {
      out.holds = false;
      out.witness_tau = tau;
      out.witness_value = value;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// UBST sweep

template <typename Scalar = double>
struct SweepEntry {
  Vec<Scalar> x0;
  SettlingReport<Scalar> report;
  bool pass{false};
  std::string error;
};

template <typename Scalar = double>
struct SweepReport {
  std::vector<SweepEntry<Scalar>> entries;
  Scalar bound{};
  bool all_pass{true};
  /// Settle times never decrease as |x0| grows (ties within 2h allowed).
  bool nondecreasing{true};
  /// Spread max - min of settle times over nonzero initial states.
  Scalar spread{0};
};

/// Simulates every initial state (concurrently) over `horizon` and checks
/// settle_time <= eta T_c + 2h past t0.
template <typename Scalar>
SweepReport<Scalar> check_ubst_sweep(const SystemPair<Scalar>& sp, const std::vector<Vec<Scalar>>& inits,
                                     Scalar epsilon, Scalar dwell, Scalar horizon, const StepPolicy<Scalar>& policy) {
  SweepReport<Scalar> out;
  out.bound = sp.profile.switch_time() + 2 * policy.h;

  std::vector<std::future<SweepEntry<Scalar>>> jobs;
  for (const auto& x0 : inits) {
    jobs.push_back(std::async(std::launch::async, [&sp, x0, epsilon, dwell, horizon, &policy, bound = out.bound] {
      SweepEntry<Scalar> entry;
      entry.x0 = x0;
      try {
        const auto traj = simulate(sp, x0, horizon, policy);
        entry.report = estimate_settling_time(traj, epsilon, dwell);
        entry.pass = entry.report.settled && entry.report.settle_time - sp.t0 <= bound;
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
      return entry;
    }));
  }
  for (auto& job : jobs) out.entries.push_back(job.get());

  std::vector<const SweepEntry<Scalar>*> order;
  for (const auto& e : out.entries) {
    out.all_pass = out.all_pass && e.pass;
    if (e.pass && e.x0.template lpNorm<Eigen::Infinity>() > epsilon) order.push_back(&e);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->x0.template lpNorm<Eigen::Infinity>() < b->x0.template lpNorm<Eigen::Infinity>();
  });
  if (!order.empty()) {
    Scalar lo = order.front()->report.settle_time;
    Scalar hi = lo;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Scalar s = order[k]->report.settle_time;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      for (std::size_t j = 0; j < k; ++j) {
        const bool larger = order[k]->x0.template lpNorm<Eigen::Infinity>() >
                            order[j]->x0.template lpNorm<Eigen::Infinity>();
        if (larger && s < order[j]->report.settle_time - 2 * policy.h) out.nondecreasing = false;
      }
    }
    out.spread = hi - lo;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gain bound

enum class CheckStatus { Pass, Fail, Skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    default: return "skipped";
  }
}

template <typename Scalar = double>
struct GainBoundResult {
  CheckStatus status{CheckStatus::Skipped};
  Scalar max_gain{0};
  /// log rho(T_max*); kept in log form since the bound itself can be astronomically large.
  Scalar log_bound{std::numeric_limits<Scalar>::infinity()};
  std::string note;
};

/// Every recorded gain must stay below rho(T_max*).
template <typename Scalar>
GainBoundResult<Scalar> check_gain_bound(const Trajectory<Scalar>& traj, const BlowUpProfile<Scalar>& profile,
                                         Scalar T_max_star) {
  GainBoundResult<Scalar> out;
  for (Scalar g : traj.gains) out.max_gain = std::max(out.max_gain, g);
  if (!std::isfinite(profile.T_f()) || !std::isfinite(T_max_star)) {
    out.note = "unbounded-gain design";
    return out;
  }
  if (!(T_max_star > 0)) throw std::invalid_argument("gain bound: T_max* must be positive");
  out.log_bound = profile.log_rho(T_max_star);
  const bool ok = std::isfinite(out.max_gain) && std::log(out.max_gain) <= out.log_bound;
  out.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  return out;
}

}  // namespace ptime
