#pragma once

#include "ptime/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ptime {

enum class Method { Euler, RK4 };

/// Fixed base step with gain-adaptive substeps:
///   h_eff = h / max(1, (kappa / kappa_ref)^kappa_power).
/// kappa_power = 1 spaces substeps uniformly in auxiliary time; raising it to the
/// chain order keeps the per-step jump of the last component (gain kappa^n) at the
/// base-step level.
template <typename Scalar = double>
struct StepPolicy {
  Method method = Method::Euler;
  Scalar h{1e-5};
  Scalar kappa_ref{10};
  Scalar kappa_power{1};
  int stride = 1;
  Scalar divergence_bound{1e12};

  Scalar effective_step(Scalar kappa) const {
    const Scalar ratio = kappa / kappa_ref;
    if (ratio <= Scalar(1)) return h;
    return h / (kappa_power == Scalar(1) ? ratio : std::pow(ratio, kappa_power));
  }

  void validate() const {
    if (!(h > 0) || !std::isfinite(h)) throw std::invalid_argument("step h must be positive");
    if (!(kappa_ref > 0)) throw std::invalid_argument("kappa_ref must be positive");
    if (!(kappa_power >= 0)) throw std::invalid_argument("kappa_power must be >= 0");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  }
};

template <typename Scalar = double>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<Vec<Scalar>> states;
  std::vector<Scalar> gains;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return times.size(); }
  int order() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

/// Integration aborted: state norm above the divergence bound or non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

namespace detail {

template <typename Scalar>
void check_state(const Vec<Scalar>& x, Scalar t, Scalar last_valid, Scalar bound) {
  if (!x.allFinite())
    throw DivergenceError("non-finite state at t = " + std::to_string(double(t)), double(last_valid));
  const Scalar norm = x.template lpNorm<Eigen::Infinity>();
  if (norm > bound)
    throw DivergenceError("state norm " + std::to_string(double(norm)) + " exceeds divergence bound at t = " +
                              std::to_string(double(t)),
                          double(last_valid));
}

template <typename Scalar, typename Rhs>
Vec<Scalar> advance(Method method, Rhs& rhs, Scalar t, const Vec<Scalar>& x, Scalar dt) {
  if (method == Method::Euler) return x + dt * rhs(t, x);
  const Vec<Scalar> k1 = rhs(t, x);
  const Vec<Scalar> k2 = rhs(t + dt / 2, Vec<Scalar>(x + dt / 2 * k1));
  const Vec<Scalar> k3 = rhs(t + dt / 2, Vec<Scalar>(x + dt / 2 * k2));
  const Vec<Scalar> k4 = rhs(t + dt, Vec<Scalar>(x + dt * k3));
  return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace detail

/// Integrates dx/dt = rhs(t, x) on [t_start, t_end].
///
/// Samples are recorded on the base grid t_start + k h every `stride` nodes, at
/// every entry of `nodes` (which are hit exactly), and at t_end. Between base
/// nodes, substeps follow policy.effective_step(gain(t)). The recorded gain is
/// gain(t) at the recorded time.
template <typename Scalar, typename Rhs, typename Gain>
Trajectory<Scalar> integrate(Rhs&& rhs, Vec<Scalar> x, Scalar t_start, Scalar t_end, const StepPolicy<Scalar>& policy,
                             Gain&& gain, std::span<const Scalar> nodes = {}) {
  policy.validate();
  if (!(t_end > t_start)) throw std::invalid_argument("integrate: t_end must exceed t_start");

  std::vector<Scalar> events;
  for (Scalar node : nodes)
    if (node > t_start && node < t_end) events.push_back(node);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  Trajectory<Scalar> traj;
  auto record = [&](Scalar t) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.gains.push_back(gain(t));
  };

  detail::check_state(x, t_start, t_start, policy.divergence_bound);
  record(t_start);

  const Scalar h = policy.h;
  const Scalar snap = h * Scalar(1e-9);
  std::size_t next_event = 0;
  long long grid_index = 0;
  Scalar t = t_start;
  Scalar last_recorded = t_start;

  while (t < t_end) {
    Scalar grid_next = t_start + Scalar(grid_index + 1) * h;
    Scalar target = std::min(grid_next, t_end);
    bool at_event = false;
    if (next_event < events.size() && events[next_event] <= target + snap) {
      target = events[next_event];
      at_event = true;
    }
    const bool at_grid = std::abs(target - std::min(grid_next, t_end)) <= snap;

    while (t < target) {
      const Scalar step = policy.effective_step(gain(t));
      Scalar t_next = t + step;
      if (t_next >= target - snap) t_next = target;
      x = detail::advance(policy.method, rhs, t, x, t_next - t);
      detail::check_state(x, t_next, t, policy.divergence_bound);
      t = t_next;
    }

    bool keep = false;
    if (at_event) {
      ++next_event;
      keep = true;
    }
    if (at_grid && target < t_end + snap) {
      ++grid_index;
      if (grid_index % policy.stride == 0) keep = true;
    }
    if (t >= t_end) keep = true;
    if (keep && t > last_recorded) {
      record(t);
      last_recorded = t;
    }
  }
  return traj;
}

template <typename Scalar, typename Rhs>
Trajectory<Scalar> integrate(Rhs&& rhs, Vec<Scalar> x, Scalar t_start, Scalar t_end, const StepPolicy<Scalar>& policy) {
  return integrate(std::forward<Rhs>(rhs), std::move(x), t_start, t_end, policy, [](Scalar) { return Scalar(1); });
}

/// a cos(omega t + phase).
template <typename Scalar = double>
struct HarmonicTerm {
  Scalar amplitude{};
  Scalar frequency{};
  Scalar phase{};
};

/// Sum of harmonic terms with closed-form derivatives of any order.
template <typename Scalar = double>
struct HarmonicSignal {
  std::vector<HarmonicTerm<Scalar>> terms;

  Scalar derivative(Scalar t, int order) const {
    Scalar acc(0);
    const Scalar quarter = std::numbers::pi_v<Scalar> / 2;
    for (const auto& term : terms)
      acc += term.amplitude * std::pow(term.frequency, Scalar(order)) *
             std::cos(term.frequency * t + term.phase + Scalar(order) * quarter);
    return acc;
  }
  Scalar operator()(Scalar t) const { return derivative(t, 0); }
  /// Upper bound of |d^order/dt^order| over all t.
  Scalar derivative_bound(int order) const {
    Scalar acc(0);
    for (const auto& term : terms) acc += std::abs(term.amplitude) * std::pow(std::abs(term.frequency), Scalar(order));
    return acc;
  }
};

/// Disturbance delta(t) with its admissible bound L.
template <typename Scalar = double>
struct DisturbanceSignal {
  struct Zero {};
  struct Harmonic {
    HarmonicSignal<Scalar> signal;
  };
  struct DerivativeOfSignal {
    HarmonicSignal<Scalar> signal;
    int order{0};
  };
  std::variant<Zero, Harmonic, DerivativeOfSignal> kind = Zero{};
  Scalar bound{0};

  Scalar raw(Scalar t) const {
    if (auto* h = std::get_if<Harmonic>(&kind)) return h->signal(t);
    if (auto* d = std::get_if<DerivativeOfSignal>(&kind)) return d->signal.derivative(t, d->order);
    return Scalar(0);
  }
};

class BoundViolation : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

template <typename Scalar>
Scalar sample_disturbance(const DisturbanceSignal<Scalar>& d, Scalar t) {
  const Scalar value = d.raw(t);
  if (!(std::abs(value) <= d.bound))
    throw BoundViolation("disturbance |delta(" + std::to_string(double(t)) + ")| = " +
                         std::to_string(double(std::abs(value))) + " exceeds L = " + std::to_string(double(d.bound)));
  return value;
}

}  // namespace ptime
