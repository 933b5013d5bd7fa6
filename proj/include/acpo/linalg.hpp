#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "acpo/types.hpp"

namespace acpo {

/// Half the L1 distance between two distributions.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar total_variation(const Eigen::MatrixBase<DerivedA>& p,
                                          const Eigen::MatrixBase<DerivedB>& q) {
  return typename DerivedA::Scalar(0.5) * (p - q).cwiseAbs().sum();
}

/// KL(p || q) for categorical distributions. Terms with p = 0 contribute 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar categorical_kl(const Eigen::MatrixBase<DerivedA>& p,
                                         const Eigen::MatrixBase<DerivedB>& q) {
  using Scalar = typename DerivedA::Scalar;
  Scalar kl(0);
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= Scalar(0)) continue;
    if (q(i) <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    kl += p(i) * std::log(p(i) / q(i));
  }
  return kl;
}

/// Numerically stable softmax of a logit vector.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// Stationary distribution of a row-stochastic matrix from the linear system
/// (P^T - I) d = 0 with one row replaced by the normalization 1^T d = 1.
/// Throws std::domain_error when the system is singular (no unique stationary law).
template <typename Derived>
VectorX<typename Derived::Scalar> stationary_distribution(const Eigen::MatrixBase<Derived>& P) {
  using Scalar = typename Derived::Scalar;
  const Index n = P.rows();
  MatrixX<Scalar> system = P.transpose() - MatrixX<Scalar>::Identity(n, n);
  system.row(n - 1).setOnes();
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n);
  rhs(n - 1) = Scalar(1);
  Eigen::FullPivLU<MatrixX<Scalar>> lu(system);
  lu.setThreshold(Scalar(1e-12));
  if (!lu.isInvertible()) throw std::domain_error("stationary system is singular: chain is not ergodic");
  return lu.solve(rhs);
}

/// Matrix-free symmetric operator v -> Hv.
template <typename Scalar = double>
struct LinearOperator {
  Index dim = 0;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> apply;

  VectorX<Scalar> operator()(const VectorX<Scalar>& v) const { return apply(v); }

  static LinearOperator from_matrix(MatrixX<Scalar> m) {
    const Index d = m.rows();
    return {d, [m = std::move(m)](const VectorX<Scalar>& v) -> VectorX<Scalar> { return m * v; }};
  }
};

template <typename Scalar>
struct CgResult {
  VectorX<Scalar> x;
  Scalar residual_norm = 0;
  int iterations = 0;
  bool converged = false;
};

/// Conjugate gradient for a symmetric positive (semi)definite operator. Stops when
/// ||op(x) - b|| <= tol * ||b|| or after max_iters; returns the best iterate seen.
template <typename Scalar>
CgResult<Scalar> conjugate_gradient(const LinearOperator<Scalar>& op, const VectorX<Scalar>& b,
                                    int max_iters = 10, Scalar tol = Scalar(1e-10)) {
  if (!b.allFinite()) throw std::domain_error("conjugate_gradient: non-finite right-hand side");
  CgResult<Scalar> out;
  out.x = VectorX<Scalar>::Zero(b.size());
  const Scalar b_norm = b.norm();
  out.residual_norm = b_norm;
  if (b_norm == Scalar(0)) {
    out.converged = true;
    return out;
  }
  VectorX<Scalar> x = out.x;
  VectorX<Scalar> r = b;
  VectorX<Scalar> p = r;
  Scalar rr = r.squaredNorm();
  for (int k = 0; k < max_iters; ++k) {
    const VectorX<Scalar> hp = op(p);
    const Scalar curvature = p.dot(hp);
    if (!std::isfinite(curvature)) throw std::domain_error("conjugate_gradient: non-finite operator output");
    if (curvature <= Scalar(0)) break;
    const Scalar alpha = rr / curvature;
    x += alpha * p;
    r -= alpha * hp;
    const Scalar rr_next = r.squaredNorm();
    out.iterations = k + 1;
    const Scalar res = std::sqrt(rr_next);
    if (res < out.residual_norm) {
      out.residual_norm = res;
      out.x = x;
    }
    if (res <= tol * b_norm) {
      out.converged = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (!out.x.allFinite()) throw std::domain_error("conjugate_gradient: non-finite iterate");
  return out;
}

}  // namespace acpo
