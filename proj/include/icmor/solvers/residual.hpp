#pragma once

#include <Eigen/Dense>

#include "icmor/core/state_matrix.hpp"
#include "icmor/solvers/lyapunov_dense.hpp"

namespace icmor::solvers {

/// ||A^T X + X A + RHS||_F / ||RHS||_F (observability orientation) or
/// ||A X + X A^T + RHS||_F / ||RHS||_F. With RHS = 0 the absolute residual is
/// returned.
inline double lyapunov_residual(const StateMatrix& a, const Matrix& x, const Matrix& rhs,
                                Side side = Side::observability) {
  Matrix ax = side == Side::observability ? Matrix(a.transpose_times(x)) : Matrix(a.times(x));
  Matrix r = ax + ax.transpose() + rhs;
  const double denom = rhs.norm();
  return denom > 0 ? r.norm() / denom : r.norm();
}

/// Small symmetric core S of the low-rank Lyapunov residual. For the
/// observability side
///
///     A^T U^T U + U^T U A + G^T G = F K F^T,   F = [A^T U^T, U^T, G^T],
///
/// with K = [[0, I, 0], [I, 0, 0], [0, 0, I]]. With the thin QR factor R of F
/// the residual is Q_F S Q_F^T, S = R K R^T, so its Frobenius and spectral
/// norms are those of S. No N x N matrix is formed.
inline Matrix lowrank_residual_core(const StateMatrix& a, const Matrix& u, const Matrix& g,
                                    Side side = Side::observability) {
  const Index n = a.size();
  const Index m = u.rows();
  const Index p = g.rows();
  if (u.cols() != n || g.cols() != n)
    throw std::invalid_argument("lyapunov_residual_lowrank: shape mismatch");
  if (m == 0) return g * g.transpose();  // same nonzero spectrum as G^T G

  Matrix f(n, 2 * m + p);
  f.leftCols(m) = side == Side::observability ? Matrix(a.transpose_times(u.transpose()))
                                              : Matrix(a.times(u.transpose()));
  f.middleCols(m, m) = u.transpose();
  f.rightCols(p) = g.transpose();
  Eigen::HouseholderQR<Matrix> qr(f);
  const Index k = std::min(n, f.cols());
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Matrix rk(k, f.cols());
  rk.leftCols(m) = r.middleCols(m, m);
  rk.middleCols(m, m) = r.leftCols(m);
  rk.rightCols(p) = r.rightCols(p);
  return rk * r.transpose();
}

/// Relative residual of a low-rank Gramian X = U^T U against RHS = G^T G.
inline double lyapunov_residual_lowrank(const StateMatrix& a, const Matrix& u, const Matrix& g,
                                        Side side = Side::observability) {
  const double denom = (g * g.transpose()).norm();
  if (u.rows() == 0) {
    if (u.cols() != a.size() || g.cols() != a.size())
      throw std::invalid_argument("lyapunov_residual_lowrank: shape mismatch");
    return denom > 0 ? 1.0 : 0.0;
  }
  const double res = lowrank_residual_core(a, u, g, side).norm();
  return denom > 0 ? res / denom : res;
}

/// ||A^T X + X Ar - RHS||_F / ||RHS||_F.
inline double sylvester_residual(const StateMatrix& a, const Matrix& ar, const Matrix& x,
                                 const Matrix& rhs) {
  Matrix r = a.transpose_times(x) + x * ar - rhs;
  const double denom = rhs.norm();
  return denom > 0 ? r.norm() / denom : r.norm();
}

}  // namespace icmor::solvers
