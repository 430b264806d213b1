#pragma once

#include <cmath>
#include <vector>

namespace ptime {

/// |x|^a sign(x); a == 0 is the pure sign function with sign(0) = 0.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar a) {
  using std::abs;
  using std::pow;
  if (x == Scalar(0)) return Scalar(0);
  const Scalar s = x > Scalar(0) ? Scalar(1) : Scalar(-1);
  if (a == Scalar(0)) return s;
  if (a == Scalar(1)) return x;
  return s * pow(abs(x), a);
}

template <typename Scalar = double>
struct SignedPowerTerm {
  Scalar coefficient{};
  Scalar exponent{};
};

/// Finite sum of signed-power terms, e.g. g(x) = |x|^{1/2}sign(x) + |x|^{3/2}sign(x).
/// A linear term is a term with exponent 1.
template <typename Scalar = double>
struct PowerSum {
  std::vector<SignedPowerTerm<Scalar>> terms;

  Scalar operator()(Scalar x) const {
    Scalar acc(0);
    for (const auto& term : terms) acc += term.coefficient * signed_power(x, term.exponent);
    return acc;
  }
};

}  // namespace ptime
