#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "icmor/core/lti_system.hpp"
#include "icmor/solvers/lyapunov_dense.hpp"
#include "icmor/solvers/lyapunov_lowrank.hpp"
#include "icmor/solvers/residual.hpp"

namespace icmor {

enum class GramianKind { exact_dense, cholesky_of_dense, low_rank };

inline const char* to_string(GramianKind k) {
  switch (k) {
    case GramianKind::exact_dense: return "exact-dense";
    case GramianKind::cholesky_of_dense: return "cholesky-of-dense";
    case GramianKind::low_rank: return "low-rank";
  }
  return "?";
}

/// A Gramian X (observability Q or controllability P) in dense and/or factored
/// form. The factor convention is the same on both sides: X ~ U^T U with U of
/// size m x N.
struct GramianFactors {
  GramianKind kind = GramianKind::cholesky_of_dense;
  Side side = Side::observability;
  std::optional<Matrix> X;  // dense kinds only
  Matrix U;                 // m x N
  double residual = 0.0;    // relative Lyapunov residual
  double solver_tol = 0.0;
  bool tolerance_reached = true;
  Index iterations = 0;
  double min_eigenvalue = 0.0;  // dense kinds

  Index N() const { return U.cols(); }
  Index rank() const { return U.rows(); }
  bool has_dense() const { return X.has_value(); }
};

enum class GramianMode { automatic, dense, low_rank };

struct GramianOptions {
  GramianMode mode = GramianMode::automatic;  // automatic: dense A -> dense, sparse A -> low rank
  solvers::LowRankOptions low_rank{};
};

/// Factor of a symmetric PSD matrix via its eigendecomposition,
/// X = U^T U with U = diag(sqrt(lambda_+)) V^T, rows in decreasing lambda.
/// Eigenvalues at or below zero are dropped.
inline Matrix psd_factor(const Matrix& x, double* min_eigenvalue = nullptr) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  if (es.info() != Eigen::Success) throw Error("solvers", "eigensolver failed while factoring a Gramian");
  const Vector& lam = es.eigenvalues();  // ascending
  if (min_eigenvalue) *min_eigenvalue = lam.size() ? lam(0) : 0.0;
  Index positive = 0;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) > 0) ++positive;
  Matrix u(positive, x.cols());
  for (Index r = 0; r < positive; ++r) {
    const Index i = lam.size() - 1 - r;
    u.row(r) = std::sqrt(lam(i)) * es.eigenvectors().col(i).transpose();
  }
  return u;
}

/// Solves the Gramian equation with right-hand side G^T G (G = C for the
/// observability side, G = B^T for the controllability side).
inline GramianFactors compute_gramian(const StateMatrix& a, const Matrix& g, Side side,
                                      const GramianOptions& opt = {}) {
  GramianMode mode = opt.mode;
  if (mode == GramianMode::automatic) mode = a.is_sparse() ? GramianMode::low_rank : GramianMode::dense;
  GramianFactors out;
  out.side = side;
  if (mode == GramianMode::dense) {
    const Matrix ad = a.to_dense();
    const Matrix rhs = g.transpose() * g;
    Matrix x = solvers::solve_lyapunov_dense(ad, rhs, side);
    out.kind = GramianKind::cholesky_of_dense;
    out.residual = solvers::lyapunov_residual(a, x, rhs, side);
    out.solver_tol = 1e-10;
    out.tolerance_reached = true;
    out.U = psd_factor(x, &out.min_eigenvalue);
    out.X = std::move(x);
  } else {
    auto r = solvers::solve_lyapunov_lowrank(a, g, side, opt.low_rank);
    out.kind = GramianKind::low_rank;
    out.U = std::move(r.U);
    out.residual = r.residual;
    out.solver_tol = opt.low_rank.tol;
    out.tolerance_reached = r.tolerance_reached;
    out.iterations = r.iterations;
  }
  return out;
}

inline GramianFactors observability_gramian(const LtiSystem& sys, const GramianOptions& opt = {}) {
  return compute_gramian(sys.A(), sys.C(), Side::observability, opt);
}

/// Controllability Gramian of (A, B); pass B_aug or X0 for the augmented and
/// initial-value variants.
inline GramianFactors controllability_gramian(const StateMatrix& a, const Matrix& b,
                                              const GramianOptions& opt = {}) {
  return compute_gramian(a, b.transpose(), Side::controllability, opt);
}

}  // namespace icmor
