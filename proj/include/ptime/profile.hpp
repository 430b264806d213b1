#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace ptime {

/// Time-scale object built from a blow-up profile rho(tau) = 1 / (T_c Phi(tau)).
///
/// psi(tau) = T_c * int_0^tau Phi maps the auxiliary time tau in [0, inf) onto
/// [0, T_c). The redesigned system runs the gain kappa(t^) = rho(psi^{-1}(t^))
/// on [0, eta T_c) and 1 afterwards, where eta = psi(T_f) / T_c.
///
/// Three density kinds are supported:
///  - Exponential(alpha): Phi = alpha e^{-alpha tau}, psi = T_c (1 - e^{-alpha tau}).
///  - Rational:           Phi = 2 / (pi (tau^2 + 1)), psi = (2 T_c / pi) atan(tau).
///  - Tabulated:          piecewise-linear Phi on a grid starting at tau = 0,
///                        continued by an exponential tail carrying the missing mass.
///
/// Profiles are immutable after construction.
template <typename Scalar = double>
class BlowUpProfile {
 public:
  struct Exponential {
    Scalar alpha{1};
  };
  struct Rational {};
  struct Tabulated {
    std::vector<Scalar> tau;
    std::vector<Scalar> phi;
  };
  using Kind = std::variant<Exponential, Rational, Tabulated>;

  static constexpr Scalar infinity() { return std::numeric_limits<Scalar>::infinity(); }

  BlowUpProfile(Kind kind, Scalar T_c, Scalar T_f = infinity(), Scalar kappa_max = Scalar(1e9))
      : kind_(std::move(kind)), T_c_(T_c), T_f_(T_f), kappa_max_(kappa_max) {
    if (!(T_c > 0) || !std::isfinite(T_c))
      throw std::invalid_argument("T_c must be positive and finite");
    if (!(T_f > 0)) throw std::invalid_argument("T_f must be positive or +inf");
    if (!(kappa_max >= 1)) throw std::invalid_argument("kappa_max must be >= 1");
    if (auto* e = std::get_if<Exponential>(&kind_)) {
      if (!(e->alpha > 0) || !std::isfinite(e->alpha))
        throw std::invalid_argument("exponential rate alpha must be positive");
    }
    if (auto* tab = std::get_if<Tabulated>(&kind_)) prepare_table(*tab);
    eta_ = eta_at(T_f_);
  }

  const Kind& kind() const { return kind_; }
  Scalar T_c() const { return T_c_; }
  Scalar T_f() const { return T_f_; }
  Scalar eta() const { return eta_; }
  Scalar kappa_max() const { return kappa_max_; }
  /// Elapsed time at which the gain schedule hands over to the terminal field.
  Scalar switch_time() const { return eta_ * T_c_; }

  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return "exponential";
          else if constexpr (std::is_same_v<K, Rational>) return "rational";
          else return "tabulated";
        },
        kind_);
  }

  Scalar phi(Scalar tau) const {
    check_tau(tau);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return k.alpha * std::exp(-k.alpha * tau);
          else if constexpr (std::is_same_v<K, Rational>)
            return Scalar(2) / (std::numbers::pi_v<Scalar> * (tau * tau + 1));
          else return table_phi(tau);
        },
        kind_);
  }

  Scalar rho(Scalar tau) const {
    check_tau(tau);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>)
            return std::exp(k.alpha * tau) / (k.alpha * T_c_);
          else if constexpr (std::is_same_v<K, Rational>)
            return std::numbers::pi_v<Scalar> / (2 * T_c_) * (tau * tau + 1);
          else return 1 / (T_c_ * table_phi(tau));
        },
        kind_);
  }

  /// log rho(tau), finite even where rho itself overflows.
  Scalar log_rho(Scalar tau) const {
    check_tau(tau);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>)
            return k.alpha * tau - std::log(k.alpha * T_c_);
          else if constexpr (std::is_same_v<K, Rational>)
            return std::log(std::numbers::pi_v<Scalar> / (2 * T_c_)) + std::log1p(tau * tau);
          else if (tau >= table_.tau.back())
            return -std::log(T_c_ * table_.phi.back()) + tail_rate_ * (tau - table_.tau.back());
          else return -std::log(T_c_ * table_phi(tau));
        },
        kind_);
  }

  /// rho'(tau) / rho(tau).
  Scalar rho_log_rate(Scalar tau) const {
    check_tau(tau);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return k.alpha;
          else if constexpr (std::is_same_v<K, Rational>) return 2 * tau / (tau * tau + 1);
          else return table_log_rate(tau);
        },
        kind_);
  }

  Scalar psi(Scalar tau) const {
    if (tau == infinity()) return T_c_;
    check_tau(tau);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return -T_c_ * std::expm1(-k.alpha * tau);
          else if constexpr (std::is_same_v<K, Rational>)
            return T_c_ * Scalar(2) / std::numbers::pi_v<Scalar> * std::atan(tau);
          else return T_c_ * table_mass(tau);
        },
        kind_);
  }

  /// Inverse of psi on [0, eta T_c).
  Scalar psi_inv(Scalar t_hat) const {
    if (!(t_hat >= 0) || !(t_hat < switch_time()))
      throw std::out_of_range("psi_inv: argument " + std::to_string(double(t_hat)) +
                              " outside [0, eta*T_c)");
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return -std::log1p(-t_hat / T_c_) / k.alpha;
          else if constexpr (std::is_same_v<K, Rational>)
            return std::tan(std::numbers::pi_v<Scalar> * t_hat / (2 * T_c_));
          else return table_psi_inv(t_hat);
        },
        kind_);
  }

  bool in_transient(Scalar t_hat, Scalar guard = Scalar(0)) const {
    return t_hat < switch_time() - guard;
  }

  /// rho(psi^{-1}(t^)) while transient, 1 afterwards, clamped to kappa_max.
  Scalar kappa(Scalar t_hat, Scalar guard = Scalar(0)) const {
    if (!(t_hat >= 0)) throw std::domain_error("kappa: elapsed time must be >= 0");
    if (!in_transient(t_hat, guard)) return Scalar(1);
    const Scalar value = rho(psi_inv(t_hat));
    return std::isfinite(value) ? std::min(value, kappa_max_) : kappa_max_;
  }

  /// lim_{tau -> T_f} psi(tau) / T_c.
  Scalar eta_at(Scalar T_f) const {
    if (!(T_f > 0)) throw std::invalid_argument("T_f must be positive or +inf");
    if (T_f == infinity()) return Scalar(1);
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return -std::expm1(-k.alpha * T_f);
          else if constexpr (std::is_same_v<K, Rational>)
            return Scalar(2) / std::numbers::pi_v<Scalar> * std::atan(T_f);
          else return table_mass(T_f);
        },
        kind_);
  }

 private:
  void check_tau(Scalar tau) const {
    if (!std::isfinite(tau) || tau < 0)
      throw std::domain_error("profile evaluated at invalid tau = " + std::to_string(double(tau)));
  }

  void prepare_table(const Tabulated& tab) {
    const auto& ts = tab.tau;
    const auto& ps = tab.phi;
    if (ts.size() < 2 || ts.size() != ps.size())
      throw std::invalid_argument("tabulated profile needs >= 2 (tau, phi) samples of equal length");
    if (ts.front() != 0) throw std::invalid_argument("tabulated profile must start at tau = 0");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ps[i] > 0) || !std::isfinite(ps[i]))
        throw std::invalid_argument("tabulated phi samples must be positive and finite");
      if (i > 0 && !(ts[i] > ts[i - 1]))
        throw std::invalid_argument("tabulated tau samples must be strictly increasing");
    }
    table_ = tab;
    cumulative_.assign(ts.size(), Scalar(0));
    for (std::size_t i = 1; i < ts.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] + (ts[i] - ts[i - 1]) * (ps[i] + ps[i - 1]) / 2;
    const Scalar grid_mass = cumulative_.back();
    if (!(grid_mass < 1))
      throw std::invalid_argument("tabulated phi must carry mass < 1 on its grid (tail takes the rest)");
    tail_rate_ = ps.back() / (1 - grid_mass);

    // Nodal derivatives by centered differences; one-sided at the ends.
    const std::size_t n = ts.size();
    slope_.assign(n, Scalar(0));
    slope_[0] = (ps[1] - ps[0]) / (ts[1] - ts[0]);
    slope_[n - 1] = (ps[n - 1] - ps[n - 2]) / (ts[n - 1] - ts[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) slope_[i] = (ps[i + 1] - ps[i - 1]) / (ts[i + 1] - ts[i - 1]);
  }

  std::size_t segment(Scalar tau) const {
    auto it = std::upper_bound(table_.tau.begin(), table_.tau.end(), tau);
    return static_cast<std::size_t>(std::distance(table_.tau.begin(), it)) - 1;
  }

  Scalar table_phi(Scalar tau) const {
    const auto& ts = table_.tau;
    const auto& ps = table_.phi;
    if (tau >= ts.back()) return ps.back() * std::exp(-tail_rate_ * (tau - ts.back()));
    const std::size_t k = segment(tau);
    const Scalar w = (tau - ts[k]) / (ts[k + 1] - ts[k]);
    return ps[k] + w * (ps[k + 1] - ps[k]);
  }

  Scalar table_mass(Scalar tau) const {
    const auto& ts = table_.tau;
    if (tau >= ts.back())
      return cumulative_.back() - table_.phi.back() / tail_rate_ * std::expm1(-tail_rate_ * (tau - ts.back()));
    const std::size_t k = segment(tau);
    return cumulative_[k] + (tau - ts[k]) * (table_.phi[k] + table_phi(tau)) / 2;
  }

  Scalar table_log_rate(Scalar tau) const {
    const auto& ts = table_.tau;
    if (tau >= ts.back()) return tail_rate_;
    const std::size_t k = segment(tau);
    const Scalar w = (tau - ts[k]) / (ts[k + 1] - ts[k]);
    const Scalar dphi = slope_[k] + w * (slope_[k + 1] - slope_[k]);
    return -dphi / table_phi(tau);
  }

  Scalar table_psi_inv(Scalar t_hat) const {
    Scalar lo(0);
    Scalar hi = std::max(table_.tau.back(), Scalar(1));
    while (T_c_ * table_mass(hi) <= t_hat) hi *= 2;
    const Scalar tol = Scalar(1e-12) * T_c_;
    for (int it = 0; it < 400; ++it) {
      const Scalar mid = (lo + hi) / 2;
      const Scalar value = T_c_ * table_mass(mid);
      if (value < t_hat) lo = mid;
      else hi = mid;
      if (std::abs(value - t_hat) <= tol || hi - lo <= std::numeric_limits<Scalar>::epsilon() * hi) break;
    }
    return (lo + hi) / 2;
  }

  Kind kind_;
  Scalar T_c_;
  Scalar T_f_;
  Scalar kappa_max_;
  Scalar eta_{1};

  Tabulated table_;
  std::vector<Scalar> cumulative_;
  std::vector<Scalar> slope_;
  Scalar tail_rate_{0};
};

template <typename Scalar>
Scalar eval_rho(const BlowUpProfile<Scalar>& p, Scalar tau) { return p.rho(tau); }

template <typename Scalar>
Scalar eval_psi(const BlowUpProfile<Scalar>& p, Scalar tau) { return p.psi(tau); }

template <typename Scalar>
Scalar eval_psi_inv(const BlowUpProfile<Scalar>& p, Scalar t_hat) { return p.psi_inv(t_hat); }

template <typename Scalar>
Scalar eval_kappa(const BlowUpProfile<Scalar>& p, Scalar t_hat) { return p.kappa(t_hat); }

template <typename Scalar>
Scalar compute_eta(const BlowUpProfile<Scalar>& p, Scalar T_f) { return p.eta_at(T_f); }

template <typename Scalar = double>
struct SlackChoice {
  Scalar alpha{};
  Scalar slack{};
};

/// Slack between the bound eta T_c of an exponential profile and the least
/// settling bound: T_c (e^{-alpha T_f*} - e^{-alpha T_max*}).
template <typename Scalar>
Scalar exponential_slack(Scalar alpha, Scalar T_f_star, Scalar T_max_star, Scalar T_c) {
  return T_c * (std::exp(-alpha * T_f_star) - std::exp(-alpha * T_max_star));
}

/// Picks an exponential rate alpha whose slack is <= epsilon.
///
/// The slack is unimodal in alpha; the search starts at its maximiser and walks
/// the decreasing tail by doubling, then bisects down to the smallest admissible rate.
template <typename Scalar>
SlackChoice<Scalar> choose_alpha_for_slack(Scalar T_f_star, Scalar T_max_star, Scalar T_c, Scalar epsilon) {
  if (!(T_f_star > 0) || !(T_max_star >= T_f_star) || !std::isfinite(T_max_star))
    throw std::invalid_argument("choose_alpha_for_slack: need 0 < T_f* <= T_max* < inf");
  if (!(epsilon > 0)) throw std::invalid_argument("choose_alpha_for_slack: epsilon must be positive");
  if (!(T_c > 0)) throw std::invalid_argument("choose_alpha_for_slack: T_c must be positive");
  if (T_f_star == T_max_star) return {Scalar(1), Scalar(0)};

  auto slack = [&](Scalar a) { return exponential_slack(a, T_f_star, T_max_star, T_c); };
  Scalar lo = std::log(T_max_star / T_f_star) / (T_max_star - T_f_star);
  if (slack(lo) <= epsilon) return {lo, slack(lo)};
  Scalar hi = lo;
  while (slack(hi) > epsilon) {
    lo = hi;
    hi *= 2;
  }
  for (int it = 0; it < 200 && hi - lo > Scalar(1e-13) * hi; ++it) {
    const Scalar mid = (lo + hi) / 2;
    if (slack(mid) > epsilon) lo = mid;
    else hi = mid;
  }
  return {hi, slack(hi)};
}

}  // namespace ptime
