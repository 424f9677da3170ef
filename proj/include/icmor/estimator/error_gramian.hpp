#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"
#include "icmor/linalg/arnoldi.hpp"
#include "icmor/solvers/gramian.hpp"
#include "icmor/solvers/lyapunov_dense.hpp"
#include "icmor/solvers/residual.hpp"
#include "icmor/solvers/sylvester.hpp"

namespace icmor {

/// x0-independent data of the initial-value error estimator. With the error
/// system Gramian [[Q, Qbar], [Qbar^T, Qhat]] of the FOM/ROM pair,
///
///     ||y_x0 - yr_x0||^2 = x0^T Q x0 + 2 x0^T Qbar W^T x0 + x0^T W Qhat W^T x0,
///
/// where Q is replaced by U^T U.
struct EstimatorOffline {
  Matrix U;     // m x N
  Matrix Qbar;  // N x n, A^T Qbar + Qbar Ar = C^T Cr
  Matrix Qhat;  // n x n, Ar^T Qhat + Qhat Ar = -Cr^T Cr
  Matrix W;     // N x n, x0 -> xr0 = W^T x0
  std::optional<Matrix> Q;  // dense FOM Gramian when available
  std::optional<double> gap_norm;  // ||Q - U^T U||_2
  bool gap_is_estimate = false;
  GramianKind kind = GramianKind::cholesky_of_dense;
  double gramian_residual = 0.0;
  double sylvester_residual = 0.0;
  double reduced_lyapunov_residual = 0.0;

  Index N() const { return W.rows(); }
  Index n() const { return W.cols(); }
};

struct EstimatorOptions {
  bool gap = true;
  Index dense_gap_limit = 2000;
  Index ritz_steps = 20;
  std::uint64_t seed = 11;
};

struct Estimate {
  double delta = 0.0;
  double raw_square = 0.0;
  std::optional<double> upper_bound;
};

namespace detail {

/// ||Q - U^T U||_2 from a dense Q, or an estimate from the factored residual
/// R = A^T U^T U + U^T U A + C^T C: the gap E solves A^T E + E A = R, which
/// for normal A gives ||E||_2 <= ||R||_2 / (2 |Re lambda_max|).
inline std::pair<double, bool> gramian_gap(const LtiSystem& sys, const GramianFactors& q,
                                           const EstimatorOptions& opt) {
  if (q.X && sys.N() <= opt.dense_gap_limit) {
    const Matrix diff = *q.X - q.U.transpose() * q.U;
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().cwiseAbs().maxCoeff(), false};
  }
  const Matrix core = solvers::lowrank_residual_core(sys.A(), q.U, sys.C(), Side::observability);
  Eigen::SelfAdjointEigenSolver<Matrix> es(core, Eigen::EigenvaluesOnly);
  const double r2 = es.eigenvalues().size() ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  const ComplexVector near = linalg::inverse_ritz_values(sys.A(), std::min(opt.ritz_steps, sys.N()), opt.seed);
  double rightmost = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < near.size(); ++i) rightmost = std::max(rightmost, near(i).real());
  if (!(rightmost < 0)) throw HurwitzAssumptionViolated("estimator", "rightmost Ritz value of A is not negative");
  return {r2 / (2.0 * std::abs(rightmost)), true};
}

}  // namespace detail

/// Offline phase for an uncontrolled ROM given by (Ar, Cr) and the map
/// x0 -> W^T x0. Non-projection ROMs are accepted as long as W is supplied.
inline EstimatorOffline build_error_gramian(const LtiSystem& sys, const Matrix& ar, const Matrix& cr,
                                            const Matrix& w, const GramianFactors& q,
                                            const EstimatorOptions& opt = {}) {
  const Index n = ar.rows();
  if (ar.cols() != n || cr.rows() != sys.p() || cr.cols() != n || w.rows() != sys.N() || w.cols() != n)
    throw std::invalid_argument("build_error_gramian: ROM shapes do not match the FOM");
  if (q.side != Side::observability || q.N() != sys.N())
    throw std::invalid_argument("build_error_gramian: expected the FOM observability Gramian");
  const StabilityCheck st = check_stability(ar);
  if (st.verdict != Stability::stable)
    throw HurwitzAssumptionViolated("estimator", "reduced matrix has an eigenvalue with real part " +
                                                     std::to_string(st.max_real_part));
  EstimatorOffline off;
  off.U = q.U;
  off.W = w;
  off.Q = q.X;
  off.kind = q.kind;
  off.gramian_residual = q.residual;
  const Matrix rhs = sys.C().transpose() * cr;
  off.Qbar = solvers::solve_sylvester_sparse_dense(sys.A(), ar, rhs);
  off.sylvester_residual = solvers::sylvester_residual(sys.A(), ar, off.Qbar, rhs);
  const Matrix rhs_hat = cr.transpose() * cr;
  off.Qhat = n ? solvers::solve_lyapunov_dense(ar, rhs_hat, Side::observability) : Matrix(0, 0);
  off.reduced_lyapunov_residual =
      n ? solvers::lyapunov_residual(StateMatrix(ar), off.Qhat, rhs_hat, Side::observability) : 0.0;
  if (opt.gap) {
    auto [g, est] = detail::gramian_gap(sys, q, opt);
    off.gap_norm = g;
    off.gap_is_estimate = est;
  }
  return off;
}

inline EstimatorOffline build_error_gramian(const LtiSystem& sys, const ReducedModel& rom_uc,
                                            const GramianFactors& q, const EstimatorOptions& opt = {}) {
  if (!rom_uc.W)
    throw Error("estimator", "ROM carries no left basis W", "supply W as the map x0 -> xr0");
  return build_error_gramian(sys, rom_uc.Ar, rom_uc.Cr, *rom_uc.W, q, opt);
}

/// Online phase: Delta = sqrt(||U x0||^2 + 2 x0^T Qbar W^T x0 + xr0^T Qhat xr0),
/// O(N m + N n + n^2). Rounding may make the square slightly negative; it is
/// clamped at zero and kept in raw_square.
inline Estimate estimate_delta(const EstimatorOffline& off, const Vector& x0) {
  if (x0.size() != off.N()) throw std::invalid_argument("estimate_delta: x0 has the wrong length");
  const Vector ux = off.U * x0;
  const Vector wx = off.W.transpose() * x0;
  Estimate e;
  e.raw_square = ux.squaredNorm() + 2.0 * x0.dot(off.Qbar * wx) + wx.dot(off.Qhat * wx);
  const double sq = std::max(e.raw_square, 0.0);
  e.delta = std::sqrt(sq);
  if (off.gap_norm) e.upper_bound = std::sqrt(sq + *off.gap_norm * x0.squaredNorm());
  return e;
}

/// Exact squared L2 error of the uncontrolled outputs, using the dense Q.
inline double exact_error_quadratic_form(const EstimatorOffline& off, const Vector& x0) {
  if (!off.Q)
    throw Error("estimator", "exact form requires dense Gramian", "compute the Gramian in dense mode");
  if (x0.size() != off.N()) throw std::invalid_argument("exact_error_quadratic_form: x0 has the wrong length");
  const Vector wx = off.W.transpose() * x0;
  return x0.dot(*off.Q * x0) + 2.0 * x0.dot(off.Qbar * wx) + wx.dot(off.Qhat * wx);
}

struct ZMatrix {
  Matrix Z;
  double norm = 0.0;       // ||Z||_2
  double sqrt_norm = 0.0;  // sqrt(||Z||_2)
  Vector worst_v0;         // unit eigenvector of the largest eigenvalue
};

/// Z = X0^T (U^T U + Qbar W^T + W Qbar^T + W Qhat W^T) X0, so that
/// Delta_{X0 v0}^2 = v0^T Z v0 <= ||Z||_2 ||v0||^2.
inline ZMatrix z_matrix(const EstimatorOffline& off, const Matrix& x0bar) {
  if (x0bar.rows() != off.N()) throw std::invalid_argument("z_matrix: X0 must have N rows");
  const Matrix ux = off.U * x0bar;
  const Matrix wx = off.W.transpose() * x0bar;
  const Matrix qx = off.Qbar.transpose() * x0bar;
  Matrix z = ux.transpose() * ux + qx.transpose() * wx + wx.transpose() * qx + wx.transpose() * off.Qhat * wx;
  z = 0.5 * (z + z.transpose()).eval();
  ZMatrix out;
  out.Z = z;
  if (z.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  const Vector& lam = es.eigenvalues();
  out.norm = lam.cwiseAbs().maxCoeff();
  out.sqrt_norm = std::sqrt(out.norm);
  out.worst_v0 = es.eigenvectors().col(lam.size() - 1);
  return out;
}

}  // namespace icmor
