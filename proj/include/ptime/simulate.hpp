#pragma once

#include "ptime/redesign.hpp"
#include "ptime/sim.hpp"

#include <vector>

namespace ptime {

/// Switching instants (elapsed time) the integrator must land on exactly.
template <typename Scalar>
std::vector<Scalar> schedule_nodes(const SystemPair<Scalar>& sp) {
  std::vector<Scalar> nodes{sp.profile.switch_time()};
  if (auto s = sp.field.switch_tau()) nodes.push_back(sp.profile.psi(*s));
  return nodes;
}

/// Integrates the redesigned system from y(t0) = y0 over [t0, t0 + horizon].
///
/// Stepping happens in elapsed time t - t0, so shifting t0 shifts every sample
/// time and leaves the states untouched. `delta` maps absolute time to the
/// disturbance value.
template <typename Scalar, typename Disturbance>
Trajectory<Scalar> simulate(const SystemPair<Scalar>& sp, const Vec<Scalar>& y0, Scalar horizon,
                            const StepPolicy<Scalar>& policy, Disturbance&& delta) {
  auto rhs = [&](Scalar s, const Vec<Scalar>& y) {
    return redesigned_rhs_elapsed(sp, s, y, Scalar(delta(sp.t0 + s)));
  };
  auto gain = [&](Scalar s) { return sp.profile.kappa(s); };
  const auto nodes = schedule_nodes(sp);
  Trajectory<Scalar> traj = integrate(rhs, y0, Scalar(0), horizon, policy, gain, std::span<const Scalar>(nodes));
  for (auto& t : traj.times) t += sp.t0;
  traj.meta["profile"] = sp.profile.kind_name();
  traj.meta["t0"] = std::to_string(double(sp.t0));
  return traj;
}

template <typename Scalar>
Trajectory<Scalar> simulate(const SystemPair<Scalar>& sp, const Vec<Scalar>& y0, Scalar horizon,
                            const StepPolicy<Scalar>& policy) {
  return simulate(sp, y0, horizon, policy, [](Scalar) { return Scalar(0); });
}

}  // namespace ptime
