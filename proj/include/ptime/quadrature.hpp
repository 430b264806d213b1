#pragma once

#include <cmath>
#include <stdexcept>

namespace ptime {

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_step(F& f, Scalar a, Scalar fa, Scalar b, Scalar fb, Scalar m, Scalar fm, Scalar whole, Scalar tol,
                    int depth) {
  const Scalar lm = (a + m) / 2;
  const Scalar rm = (m + b) / 2;
  const Scalar flm = f(lm);
  const Scalar frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <typename Scalar, typename F>
Scalar adaptive_simpson(F&& f, Scalar a, Scalar b, Scalar tol = Scalar(1e-12), int max_depth = 50) {
  if (!(tol > 0)) throw std::invalid_argument("adaptive_simpson: tol must be positive");
  if (a == b) return Scalar(0);
  const Scalar fa = f(a);
  const Scalar fb = f(b);
  const Scalar m = (a + b) / 2;
  const Scalar fm = f(m);
  const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace ptime
