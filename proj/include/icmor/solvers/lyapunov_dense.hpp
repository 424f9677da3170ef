#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "icmor/core/error.hpp"
#include "icmor/core/state_matrix.hpp"

#ifndef EIGEN_USE_LAPACKE
#error "icmor needs Eigen's LAPACKE backend: define EIGEN_USE_LAPACKE and link lapacke"
#endif

namespace icmor {

/// Which Lyapunov equation a Gramian solves.
///   observability:    A^T Q + Q A   = -RHS
///   controllability:  A   P + P A^T = -RHS
enum class Side { observability, controllability };

inline const char* to_string(Side s) {
  return s == Side::observability ? "observability" : "controllability";
}

namespace solvers {

namespace detail {

/// Largest real part among the eigenvalues of a real quasi-triangular Schur
/// factor, together with its spectral radius.
inline std::pair<double, double> schur_spectrum_bounds(const Matrix& t) {
  const Index n = t.rows();
  double max_re = -std::numeric_limits<double>::infinity();
  double rho = 0.0;
  for (Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double re = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
      max_re = std::max(max_re, re);
      rho = std::max(rho, std::sqrt(std::abs(det)));
      i += 2;
    } else {
      max_re = std::max(max_re, t(i, i));
      rho = std::max(rho, std::abs(t(i, i)));
      i += 1;
    }
  }
  return {max_re, rho};
}

}  // namespace detail

/// Dense Bartels-Stewart solve of a Lyapunov equation: real Schur form of A,
/// then LAPACK's quasi-triangular Sylvester kernel. The result is symmetrized.
/// Throws when A is not Hurwitz (the operator X -> A^T X + X A is then
/// singular or the solution is not a Gramian).
inline Matrix solve_lyapunov_dense(const Matrix& a, const Matrix& rhs,
                                   Side side = Side::observability) {
  const Index n = a.rows();
  if (a.cols() != n || rhs.rows() != n || rhs.cols() != n)
    throw std::invalid_argument("solve_lyapunov_dense: shape mismatch");
  if (n == 0) return Matrix(0, 0);

  // Both orientations become  M^T X + X M = -RHS.
  const Matrix m = side == Side::observability ? a : Matrix(a.transpose());
  Eigen::RealSchur<Matrix> schur(m);
  if (schur.info() != Eigen::Success)
    throw Error("solvers", "Schur decomposition failed in the Lyapunov solve");
  const Matrix& t = schur.matrixT();
  const Matrix& z = schur.matrixU();
  const auto [max_re, rho] = detail::schur_spectrum_bounds(t);
  if (!(max_re < -1e-12 * rho))
    throw Error("solvers", "singular Lyapunov operator: A is not Hurwitz",
                "the Gramian only exists for asymptotically stable systems");

  Matrix f = -(z.transpose() * rhs * z);
  double scale = 1.0;
  const lapack_int ld = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, ld, ld, t.data(), ld,
                                         t.data(), ld, f.data(), ld, &scale);
  if (info < 0) throw std::logic_error("solve_lyapunov_dense: invalid LAPACK argument");
  if (info > 0)
    throw Error("solvers", "singular Lyapunov operator (eigenvalues of A nearly mirror each other)");
  Matrix x = z * (f / scale) * z.transpose();
  return 0.5 * (x + x.transpose());
}

}  // namespace solvers
}  // namespace icmor
