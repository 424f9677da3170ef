#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "icmor/core/state_matrix.hpp"

namespace icmor::linalg {

using LinearOperator = std::function<Vector(const Vector&)>;

/// Ritz values of `op` from `steps` Arnoldi iterations started from `start`.
/// Modified Gram-Schmidt with one reorthogonalization pass. Stops early on a
/// (numerically) invariant subspace.
inline ComplexVector arnoldi_ritz_values(const LinearOperator& op, const Vector& start, Index steps) {
  const Index n = start.size();
  steps = std::min(steps, n);
  if (steps <= 0 || start.norm() == 0.0) return ComplexVector(0);
  Matrix basis(n, steps + 1);
  Matrix hess = Matrix::Zero(steps + 1, steps);
  basis.col(0) = start / start.norm();

  Index k = 0;
  for (; k < steps; ++k) {
    Vector w = op(basis.col(k));
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j <= k; ++j) {
        const double h = basis.col(j).dot(w);
        hess(j, k) += h;
        w -= h * basis.col(j);
      }
    }
    const double beta = w.norm();
    hess(k + 1, k) = beta;
    if (beta <= 1e-12 * hess.col(k).head(k + 1).norm()) {
      ++k;
      break;
    }
    basis.col(k + 1) = w / beta;
  }
  Eigen::EigenSolver<Matrix> es(hess.topLeftCorner(k, k), false);
  return es.eigenvalues();
}

/// Same, started from a seeded Gaussian vector.
inline ComplexVector arnoldi_ritz_values(const LinearOperator& op, Index n, Index steps,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return arnoldi_ritz_values(op, v, steps);
}

/// Ritz values of A (largest magnitude end of the spectrum).
inline ComplexVector ritz_values(const StateMatrix& a, Index steps, std::uint64_t seed) {
  return arnoldi_ritz_values([&](const Vector& x) { return Vector(a.times(x)); }, a.size(),
                             steps, seed);
}

namespace detail {

inline ComplexVector invert_ritz(const ComplexVector& theta) {
  ComplexVector lambda(theta.size());
  Index kept = 0;
  for (Index i = 0; i < theta.size(); ++i)
    if (std::abs(theta(i)) > 0) lambda(kept++) = 1.0 / theta(i);
  return lambda.head(kept);
}

}  // namespace detail

/// Ritz values of A from Arnoldi on A^{-1}, i.e. the end of the spectrum
/// closest to the origin.
inline ComplexVector inverse_ritz_values(const StateMatrix& a, Index steps, std::uint64_t seed) {
  ShiftedSolver<double> lu(a, 0.0);
  return detail::invert_ritz(arnoldi_ritz_values([&](const Vector& x) { return Vector(lu.solve(x)); }, a.size(),
                                                 steps, seed));
}

/// Ritz values of A from Arnoldi on A^{-1} started from `start`.
inline ComplexVector inverse_ritz_values(const StateMatrix& a, const Vector& start, Index steps) {
  ShiftedSolver<double> lu(a, 0.0);
  return detail::invert_ritz(
      arnoldi_ritz_values([&](const Vector& x) { return Vector(lu.solve(x)); }, start, steps));
}

}  // namespace icmor::linalg
