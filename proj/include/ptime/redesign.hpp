#pragma once

#include "ptime/fields.hpp"
#include "ptime/profile.hpp"
#include "ptime/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ptime {

/// Auxiliary tau-system and redesigned t-system sharing one profile and field.
///
///   aux:        dz/dtau = r F(z1) + r A0 z - (rho'/rho) M z + r^{1-n} rho^{-n} D delta^
///   redesigned: dy/dt   = H(y1, t) + A0 y + D delta
///               H = Lambda(r kappa(t - t0)) F(y1) while transient, G(y1) afterwards,
///               Lambda(k) = diag(k, k^2, ..., k^n).
///
/// The two are related by z_i = (r kappa)^{1-i} y_i and t = psi(tau) + t0.
template <typename Scalar = double>
struct SystemPair {
  BlowUpProfile<Scalar> profile;
  CorrectionField<Scalar> field;
  DriftG<Scalar> drift;
  Scalar L{0};
  Scalar t0{0};

  SystemPair(BlowUpProfile<Scalar> p, CorrectionField<Scalar> f, DriftG<Scalar> g, Scalar bound,
             Scalar start = Scalar(0))
      : profile(std::move(p)), field(std::move(f)), drift(std::move(g)), L(bound), t0(start) {
    if (field.order() != drift.order())
      throw std::invalid_argument("system pair: field and drift orders differ");
    if (!(L >= 0) || !std::isfinite(L)) throw std::invalid_argument("system pair: L must be finite and >= 0");
    if (!std::isfinite(t0)) throw std::invalid_argument("system pair: t0 must be finite");
  }

  int order() const { return field.order(); }

  /// Auxiliary time at which a switched field changes family, mapped onto elapsed t.
  Scalar field_tau(Scalar t_hat) const {
    const auto s = field.switch_tau();
    if (!s) return std::numeric_limits<Scalar>::infinity();
    return t_hat < profile.psi(*s) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  }
};

namespace detail {

template <typename Scalar>
void check_disturbance(Scalar value, Scalar bound, const char* what) {
  if (!(std::abs(value) <= bound))
    throw ContractViolation(std::string(what) + ": |disturbance| = " + std::to_string(double(std::abs(value))) +
                            " exceeds L = " + std::to_string(double(bound)));
}

template <typename Scalar>
void add_shift(const Vec<Scalar>& y, Vec<Scalar>& out) {
  const auto n = y.size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) out(i) += y(i + 1);
}

}  // namespace detail

template <typename Scalar>
Vec<Scalar> aux_rhs(const SystemPair<Scalar>& sp, Scalar tau, const Vec<Scalar>& z, Scalar delta_hat) {
  detail::check_disturbance(delta_hat, sp.L, "aux_rhs");
  const int n = sp.order();
  const Scalar r = sp.field.r();
  Vec<Scalar> out = r * sp.field(z(0), tau);
  for (int i = 0; i + 1 < n; ++i) out(i) += r * z(i + 1);
  const Scalar rate = sp.profile.rho_log_rate(tau);
  for (int i = 1; i < n; ++i) out(i) -= rate * Scalar(i) * z(i);
  if (delta_hat != Scalar(0)) {
    const Scalar log_scale = Scalar(1 - n) * std::log(r) - Scalar(n) * sp.profile.log_rho(tau);
    out(n - 1) += std::exp(log_scale) * delta_hat;
  }
  return out;
}

/// H evaluated at elapsed time t^ = t - t0.
template <typename Scalar>
Vec<Scalar> eval_H_elapsed(const SystemPair<Scalar>& sp, Scalar y1, Scalar t_hat, Scalar guard = Scalar(0)) {
  if (!sp.profile.in_transient(t_hat, guard)) return sp.drift(y1);
  const Scalar gain = sp.field.r() * sp.profile.kappa(t_hat);
  Vec<Scalar> out = sp.field(y1, sp.field_tau(t_hat));
  Scalar power = gain;
  for (int i = 0; i < sp.order(); ++i) {
    out(i) *= power;
    power *= gain;
  }
  return out;
}

template <typename Scalar>
Vec<Scalar> eval_H(const SystemPair<Scalar>& sp, Scalar y1, Scalar t, Scalar guard = Scalar(0)) {
  return eval_H_elapsed(sp, y1, t - sp.t0, guard);
}

template <typename Scalar>
Vec<Scalar> redesigned_rhs_elapsed(const SystemPair<Scalar>& sp, Scalar t_hat, const Vec<Scalar>& y, Scalar delta) {
  detail::check_disturbance(delta, sp.L, "redesigned_rhs");
  Vec<Scalar> out = eval_H_elapsed(sp, y(0), t_hat);
  detail::add_shift(y, out);
  out(sp.order() - 1) += delta;
  return out;
}

template <typename Scalar>
Vec<Scalar> redesigned_rhs(const SystemPair<Scalar>& sp, Scalar t, const Vec<Scalar>& y, Scalar delta) {
  return redesigned_rhs_elapsed(sp, t - sp.t0, y, delta);
}

/// z = Lambda-type rescaling y_i = (r rho(tau))^{i-1} z_i.
template <typename Scalar>
Vec<Scalar> aux_to_redesigned(const SystemPair<Scalar>& sp, Scalar tau, const Vec<Scalar>& z) {
  const Scalar gain = sp.field.r() * sp.profile.rho(tau);
  Vec<Scalar> y = z;
  Scalar power(1);
  for (int i = 0; i < sp.order(); ++i) {
    y(i) *= power;
    power *= gain;
  }
  return y;
}

}  // namespace ptime
