#pragma once

#include <Eigen/Dense>

#include "icmor/core/error.hpp"
#include "icmor/core/state_matrix.hpp"

namespace icmor::solvers {

/// Solves the sparse-dense Sylvester equation
///
///     A^T X + X Ar = RHS,      A: N x N (sparse or dense), Ar: n x n, X: N x n.
///
/// With the complex Schur form Ar = Z T Z^*, Y = X Z satisfies
/// A^T Y + Y T = RHS Z. T is upper triangular, so column j of Y solves
///
///     (A^T + T_jj I) y_j = (RHS Z)_j - sum_{i<j} T_ij y_i,
///
/// one shifted N-dimensional solve per column, in increasing j. The columns
/// depend on each other and cannot be solved in parallel. X = Y Z^* is real
/// up to rounding; the imaginary part is checked and discarded.
inline Matrix solve_sylvester_sparse_dense(const StateMatrix& a, const Matrix& ar,
                                           const Matrix& rhs, double imag_tol = 1e-8) {
  const Index big = a.size();
  const Index n = ar.rows();
  if (ar.cols() != n || rhs.rows() != big || rhs.cols() != n)
    throw std::invalid_argument("solve_sylvester_sparse_dense: shape mismatch");
  if (n == 0) return Matrix(big, 0);

  Eigen::ComplexSchur<Matrix> schur(ar);
  if (schur.info() != Eigen::Success)
    throw Error("solvers", "complex Schur decomposition of the reduced matrix failed");
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& z = schur.matrixU();

  const ComplexMatrix f = rhs.cast<Complex>() * z;
  ComplexMatrix y(big, n);
  for (Index j = 0; j < n; ++j) {
    ComplexVector col = f.col(j);
    if (j > 0) col.noalias() -= y.leftCols(j) * t.col(j).head(j);
    try {
      ShiftedSolver<Complex> lu(a, t(j, j));
      y.col(j) = lu.solve_transposed(col);
    } catch (const Error&) {
      throw Error("solvers",
                  "spectra not separated: A^T + lambda I is singular for an eigenvalue "
                  "lambda of the reduced matrix",
                  "both A and the reduced matrix must be Hurwitz");
    }
  }
  const ComplexMatrix x = y * z.adjoint();
  const double re_norm = x.real().norm();
  const double im_norm = x.imag().norm();
  if (im_norm > imag_tol * std::max(re_norm, std::numeric_limits<double>::min()))
    throw Error("solvers", "Sylvester solution has a non-negligible imaginary part (" +
                               std::to_string(im_norm / std::max(re_norm, 1e-300)) + " relative)");
  return x.real();
}

}  // namespace icmor::solvers
