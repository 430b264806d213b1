#pragma once

#include "ptime/redesign.hpp"
#include "ptime/sim.hpp"
#include "ptime/simulate.hpp"

#include <algorithm>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace ptime {

/// Online filtering differentiator with a prescribed convergence bound.
///
/// State v = (w_1..w_{n_f}, z_0..z_{n_d}), n = n_d + n_f + 1, driven by the
/// innovation e = w_1 (or z_0 - y when n_f = 0):
///
///   dw_i/dt = c_i(e) + w_{i+1}              i < n_f
///   dw_nf/dt = c_nf(e) + z_0 - y(t)
///   dz_j/dt = c_{n_f+1+j}(e) + z_{j+1}       z_{n_d+1} = 0
///
/// with c = Lambda(r kappa) F while transient and c = G afterwards. The error
/// x = (w, z_j - y^{(j)}) follows the redesigned system with delta = -y^{(n_d+1)}.
///
/// step(y, dt) holds a sample over dt; step(y_of_t, dt) reads the signal at every
/// substep. The integration step is taken from the policy, independent of dt.
template <typename Scalar = double>
class FilteringDifferentiator {
 public:
  struct Output {
    Vec<Scalar> z;
    Vec<Scalar> w;
    Scalar kappa{1};
  };

  FilteringDifferentiator(SystemPair<Scalar> sp, int n_d, StepPolicy<Scalar> policy)
      : sp_(std::move(sp)), n_d_(n_d), policy_(policy) {
    policy_.validate();
    if (n_d < 0) throw std::invalid_argument("differentiator: n_d must be >= 0");
    n_f_ = sp_.order() - n_d - 1;
    if (n_f_ < 0) throw std::invalid_argument("differentiator: field order must be >= n_d + 1");
    nodes_ = schedule_nodes(sp_);
    std::sort(nodes_.begin(), nodes_.end());
    reset();
  }

  int n_d() const { return n_d_; }
  int n_f() const { return n_f_; }
  int order() const { return sp_.order(); }
  const SystemPair<Scalar>& system() const { return sp_; }
  Scalar time() const { return sp_.t0 + elapsed_; }
  Scalar elapsed() const { return elapsed_; }
  const Vec<Scalar>& state() const { return v_; }

  void reset() {
    v_ = Vec<Scalar>::Zero(order());
    elapsed_ = Scalar(0);
  }

  void reset(const Vec<Scalar>& w0, const Vec<Scalar>& z0) {
    if (w0.size() != n_f_ || z0.size() != n_d_ + 1)
      throw std::invalid_argument("differentiator reset: wrong state sizes");
    reset();
    v_.head(n_f_) = w0;
    v_.tail(n_d_ + 1) = z0;
  }

  /// Derivative of the internal state for a held sample y at elapsed time s.
  Vec<Scalar> rate(Scalar s, const Vec<Scalar>& v, Scalar y) const {
    const int n = order();
    const Scalar e = n_f_ > 0 ? v(0) : v(0) - y;
    Vec<Scalar> out;
    if (sp_.profile.in_transient(s)) {
      out = eval_H_elapsed(sp_, e, s);
    } else {
      out = sp_.drift(e);
    }
    for (int i = 0; i + 1 < n; ++i) out(i) += v(i + 1);
    if (n_f_ > 0) out(n_f_ - 1) -= y;
    return out;
  }

  /// Advances by dt with y held constant; returns the estimates at the new time.
  Output step(Scalar y, Scalar dt) {
    return step([y](Scalar) { return y; }, dt);
  }

  /// Advances by dt, reading the measurement y(t) (absolute time) at every
  /// integration substep. Use this when the signal is available between samples:
  /// a held sample looks piecewise constant to an observer whose bandwidth r kappa
  /// exceeds the sample rate.
  template <typename Signal>
    requires std::is_invocable_r_v<Scalar, Signal, Scalar>
  Output step(Signal&& y, Scalar dt) {
    if (!(dt > 0)) throw std::invalid_argument("differentiator step: dt must be positive");
    const Scalar end = elapsed_ + dt;
    const Scalar snap = policy_.h * Scalar(1e-9);
    while (elapsed_ < end) {
      Scalar target = std::min(end, elapsed_ + policy_.effective_step(sp_.profile.kappa(elapsed_)));
      target = std::min(target, elapsed_ + policy_.h);
      for (Scalar node : nodes_)
        if (node > elapsed_ && node < target) target = node;
      if (end - target <= snap) target = end;
      v_ += (target - elapsed_) * rate(elapsed_, v_, y(sp_.t0 + elapsed_));
      detail::check_state(v_, sp_.t0 + target, sp_.t0 + elapsed_, policy_.divergence_bound);
      elapsed_ = target;
    }
    return output();
  }

  Output output() const {
    return {v_.tail(n_d_ + 1), v_.head(n_f_), sp_.profile.kappa(elapsed_)};
  }

  /// Error coordinates x given the true derivatives y, y', ..., y^{(n_d)} at time().
  Vec<Scalar> error_state(const std::vector<Scalar>& derivatives) const {
    if (static_cast<int>(derivatives.size()) < n_d_ + 1)
      throw std::invalid_argument("error_state: need n_d + 1 derivatives");
    Vec<Scalar> x = v_;
    for (int j = 0; j <= n_d_; ++j) x(n_f_ + j) -= derivatives[static_cast<std::size_t>(j)];
    return x;
  }

 private:
  SystemPair<Scalar> sp_;
  int n_d_;
  int n_f_{0};
  StepPolicy<Scalar> policy_;
  std::vector<Scalar> nodes_;
  Vec<Scalar> v_;
  Scalar elapsed_{0};
};

}  // namespace ptime
