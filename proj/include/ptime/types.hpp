#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ptime {

/// Largest chain order handled with stack-allocated storage.
inline constexpr int kMaxOrder = 10;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxOrder, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxOrder, kMaxOrder>;

/// Raised when a caller breaks an operation's precondition (e.g. |delta| > L).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Upper shift matrix A0: ones on the superdiagonal.
template <typename Scalar>
Mat<Scalar> shift_matrix(int n) {
  Mat<Scalar> a = Mat<Scalar>::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = Scalar(1);
  return a;
}

/// M = diag(0, 1, ..., n-1).
template <typename Scalar>
Mat<Scalar> index_matrix(int n) {
  Mat<Scalar> m = Mat<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Scalar(i);
  return m;
}

/// Disturbance input direction D = e_n.
template <typename Scalar>
Vec<Scalar> input_vector(int n) {
  Vec<Scalar> d = Vec<Scalar>::Zero(n);
  d(n - 1) = Scalar(1);
  return d;
}

inline void check_order(int n) {
  if (n < 1 || n > kMaxOrder)
    throw std::invalid_argument("order must be in [1, " + std::to_string(kMaxOrder) +
                                "], got " + std::to_string(n));
}

}  // namespace ptime
