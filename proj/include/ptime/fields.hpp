#pragma once

#include "ptime/signed_power.hpp"
#include "ptime/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace ptime {

/// True when every eigenvalue of a has real part below -margin.
template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& a, double margin = 1e-9) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = a;
  Eigen::EigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver(dense, false);
  if (solver.info() != Eigen::Success) return false;
  return (solver.eigenvalues().real().array() < Scalar(-margin)).all();
}

/// Companion-form matrix A0 + K C with C = e_1^T.
template <typename Scalar>
Mat<Scalar> output_injection_matrix(const Vec<Scalar>& gains) {
  const int n = static_cast<int>(gains.size());
  Mat<Scalar> a = shift_matrix<Scalar>(n);
  a.col(0) += gains;
  return a;
}

/// Gamma = A0 - alpha M, the characteristic coefficients a of Gamma and the
/// observer-canonical similarity transform Q = (V O(Gamma, C))^{-1}.
template <typename Scalar = double>
struct CanonicalTransform {
  Mat<Scalar> gamma;
  Vec<Scalar> a;
  Mat<Scalar> q;
};

template <typename Scalar>
CanonicalTransform<Scalar> build_canonical_transform(int n, Scalar alpha) {
  check_order(n);
  if (!(alpha > 0)) throw std::invalid_argument("canonical transform: alpha must be positive");

  CanonicalTransform<Scalar> out;
  out.gamma = shift_matrix<Scalar>(n) - alpha * index_matrix<Scalar>(n);

  // s (s + alpha) ... (s + (n-1) alpha), highest power first.
  std::vector<Scalar> poly{Scalar(1)};
  for (int j = 0; j < n; ++j) {
    std::vector<Scalar> next(poly.size() + 1, Scalar(0));
    const Scalar root = alpha * Scalar(j);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k];
      next[k + 1] += root * poly[k];
    }
    poly = std::move(next);
  }
  out.a.resize(n);
  for (int i = 0; i < n; ++i) out.a(i) = poly[static_cast<std::size_t>(i) + 1];

  Mat<Scalar> obs(n, n);
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxOrder> row =
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxOrder>::Zero(n);
  row(0) = Scalar(1);
  for (int i = 0; i < n; ++i) {
    obs.row(i) = row;
    row = row * out.gamma;
  }

  Mat<Scalar> v = Mat<Scalar>::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) v(i, j) = out.a(i - j - 1);

  const Mat<Scalar> vo = v * obs;
  Eigen::PartialPivLU<Mat<Scalar>> lu(vo);
  if (!(std::abs(lu.determinant()) > std::numeric_limits<Scalar>::epsilon()))
    throw std::logic_error("canonical transform: V*O is singular");
  out.q = lu.inverse();
  return out;
}

/// Correction field F: R -> R^n driving the transient phase.
///
/// Gains are stored signed (negative for stabilizing designs). Three variants:
///  - Linear:             F_i(z1) = k_i z1
///  - HosmPowers:         F_i(z1) = l_i |z1|^{(n-i)/n} sign(z1)
///  - CanonicalComposite: F(z1)   = Q [k_i g_i(z1) + a_i z1]_i, with (Q, a) from
///                        build_canonical_transform(n, alpha). An optional second
///                        family of g_i takes over once the auxiliary time passes
///                        a switch instant.
template <typename Scalar = double>
class CorrectionField {
 public:
  struct Linear {
    Vec<Scalar> gains;
  };
  struct HosmPowers {
    Vec<Scalar> gains;
  };
  struct LateFamily {
    Scalar tau_switch{};
    std::vector<PowerSum<Scalar>> g;
  };
  struct CanonicalComposite {
    Vec<Scalar> gains;
    std::vector<PowerSum<Scalar>> g;
    Scalar alpha{1};
    CanonicalTransform<Scalar> transform;
    std::optional<LateFamily> late;
  };
  using Variant = std::variant<Linear, HosmPowers, CanonicalComposite>;

  static CorrectionField linear(Vec<Scalar> gains, Scalar r = Scalar(1)) {
    const int n = static_cast<int>(gains.size());
    check_order(n);
    if (!is_hurwitz(output_injection_matrix<Scalar>(gains)))
      throw std::invalid_argument("linear field: A0 + K C is not Hurwitz");
    return CorrectionField(n, r, Linear{std::move(gains)});
  }

  static CorrectionField hosm(Vec<Scalar> gains, Scalar r = Scalar(1)) {
    const int n = static_cast<int>(gains.size());
    check_order(n);
    return CorrectionField(n, r, HosmPowers{std::move(gains)});
  }

  static CorrectionField canonical(Vec<Scalar> gains, std::vector<PowerSum<Scalar>> g, Scalar alpha,
                                   Scalar r = Scalar(1), std::optional<LateFamily> late = std::nullopt) {
    const int n = static_cast<int>(gains.size());
    check_order(n);
    if (static_cast<int>(g.size()) != n)
      throw std::invalid_argument("canonical field: need one g_i per gain");
    if (late && static_cast<int>(late->g.size()) != n)
      throw std::invalid_argument("canonical field: late family needs one g_i per gain");
    auto transform = build_canonical_transform<Scalar>(n, alpha);
    return CorrectionField(n, r,
                           CanonicalComposite{std::move(gains), std::move(g), alpha, std::move(transform),
                                              std::move(late)});
  }

  int order() const { return n_; }
  Scalar r() const { return r_; }
  const Variant& variant() const { return variant_; }

  /// Auxiliary-time instant at which a canonical field swaps its g family.
  std::optional<Scalar> switch_tau() const {
    if (auto* c = std::get_if<CanonicalComposite>(&variant_); c && c->late) return c->late->tau_switch;
    return std::nullopt;
  }

  /// F(z1). tau is the auxiliary time; it only matters for a switched canonical field.
  Vec<Scalar> operator()(Scalar z1, Scalar tau = std::numeric_limits<Scalar>::infinity()) const {
    Vec<Scalar> out(n_);
    if (auto* lin = std::get_if<Linear>(&variant_)) {
      out = lin->gains * z1;
    } else if (auto* hosm = std::get_if<HosmPowers>(&variant_)) {
      for (int i = 0; i < n_; ++i)
        out(i) = hosm->gains(i) * signed_power(z1, Scalar(n_ - 1 - i) / Scalar(n_));
    } else {
      const auto& c = std::get<CanonicalComposite>(variant_);
      const auto& family = (c.late && tau >= c.late->tau_switch) ? c.late->g : c.g;
      Vec<Scalar> inner(n_);
      for (int i = 0; i < n_; ++i) inner(i) = c.gains(i) * family[static_cast<std::size_t>(i)](z1) + c.transform.a(i) * z1;
      out.noalias() = c.transform.q * inner;
    }
    return out;
  }

 private:
  CorrectionField(int n, Scalar r, Variant v) : n_(n), r_(r), variant_(std::move(v)) {
    if (!(r >= 0) || !std::isfinite(r)) throw std::invalid_argument("field gain r must be finite and >= 0");
  }

  int n_;
  Scalar r_;
  Variant variant_;
};

template <typename Scalar>
Vec<Scalar> eval_F(const CorrectionField<Scalar>& f, Scalar z1,
                   Scalar tau = std::numeric_limits<Scalar>::infinity()) {
  return f(z1, tau);
}

/// Terminal drift G(x1)_i = l_i |x1|^{(n - i m)/n} sign(x1).
template <typename Scalar = double>
class DriftG {
 public:
  DriftG(Vec<Scalar> gains, Scalar m) : gains_(std::move(gains)), m_(m) {
    n_ = static_cast<int>(gains_.size());
    check_order(n_);
    if (!(m >= 0 && m <= 1)) throw std::invalid_argument("drift exponent step m must be in [0, 1]");
    if (m == 0 && !is_hurwitz(output_injection_matrix<Scalar>(gains_)))
      throw std::invalid_argument("linear drift: s^n - l1 s^{n-1} - ... - ln is not Hurwitz");
    exponents_.resize(n_);
    for (int i = 0; i < n_; ++i) exponents_(i) = (Scalar(n_) - Scalar(i + 1) * m_) / Scalar(n_);
  }

  int order() const { return n_; }
  Scalar m() const { return m_; }
  const Vec<Scalar>& gains() const { return gains_; }

  Vec<Scalar> operator()(Scalar x1) const {
    Vec<Scalar> out(n_);
    for (int i = 0; i < n_; ++i) out(i) = gains_(i) * signed_power(x1, exponents_(i));
    return out;
  }

 private:
  Vec<Scalar> gains_;
  Scalar m_;
  int n_{};
  Vec<Scalar> exponents_;
};

template <typename Scalar>
Vec<Scalar> eval_G(const DriftG<Scalar>& g, Scalar x1) {
  return g(x1);
}

}  // namespace ptime
