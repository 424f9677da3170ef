#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "icmor/core/error.hpp"
#include "icmor/core/state_matrix.hpp"
#include "icmor/linalg/arnoldi.hpp"

namespace icmor {

/// Full order model  x' = A x + B u,  y = C x,  x(0) = x0.
/// q = 0 (no input columns) is allowed.
class LtiSystem {
 public:
  LtiSystem() = default;

  LtiSystem(StateMatrix a, Matrix b, Matrix c, Vector x0)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), x0_(std::move(x0)) {
    const Index n = a_.size();
    if (b_.rows() != n) throw std::invalid_argument("LtiSystem: B must have N rows");
    if (c_.cols() != n) throw std::invalid_argument("LtiSystem: C must have N columns");
    if (x0_.size() != n) throw std::invalid_argument("LtiSystem: x0 must have length N");
  }

  LtiSystem(Matrix a, Matrix b, Matrix c, Vector x0)
      : LtiSystem(StateMatrix(std::move(a)), std::move(b), std::move(c), std::move(x0)) {}

  const StateMatrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Vector& x0() const { return x0_; }

  Index N() const { return a_.size(); }
  Index p() const { return c_.rows(); }
  Index q() const { return b_.cols(); }

  LtiSystem with_x0(Vector x0) const { return {a_, b_, c_, std::move(x0)}; }
  LtiSystem with_B(Matrix b) const { return {a_, std::move(b), c_, x0_}; }

 private:
  StateMatrix a_;
  Matrix b_ = Matrix(0, 0);
  Matrix c_ = Matrix(0, 0);
  Vector x0_ = Vector(0);
};

/// Reduced model  xr' = Ar xr + Br u,  yr = Cr xr,  xr(0) = x0r, together with
/// the bases it was projected with (absent for non-projection ROMs).
struct ReducedModel {
  Matrix Ar;
  Matrix Br;
  Matrix Cr;
  Vector x0r;
  std::optional<Matrix> V;
  std::optional<Matrix> W;

  Index order() const { return Ar.rows(); }

  LtiSystem as_system() const { return LtiSystem(Ar, Br, Cr, x0r); }

  /// ||W^T V - I||_F, or 0 when no bases are attached.
  double biorthogonality_error() const {
    if (!V || !W) return 0.0;
    return (W->transpose() * *V - Matrix::Identity(order(), order())).norm();
  }
};

/// ROM whose uncontrolled (initial-value driven) and controlled (input driven)
/// parts were reduced separately. The controlled part starts at rest and the
/// uncontrolled part has a zero input matrix.
struct SplitRom {
  ReducedModel uncontrolled;
  ReducedModel controlled;

  Index order() const { return uncontrolled.order() + controlled.order(); }
};

enum class Stability { stable, marginal, unstable };

struct StabilityCheck {
  Stability verdict;
  double max_real_part;
  double spectral_radius;
};

inline constexpr double kStabilityTolerance = 1e-12;

/// Classifies the spectrum of a dense square matrix. Eigenvalues with real part
/// in (-tol*rho, 0] count as marginal, rho being the spectral radius.
inline StabilityCheck check_stability(const Matrix& a, double tol = kStabilityTolerance) {
  if (a.rows() != a.cols()) throw std::invalid_argument("check_stability: matrix must be square");
  if (!a.allFinite()) throw std::invalid_argument("check_stability: non-finite entries");
  if (a.rows() == 0) return {Stability::stable, -std::numeric_limits<double>::infinity(), 0.0};
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success)
    throw Error("core", "eigenvalue iteration failed during the stability check");
  const ComplexVector& ev = es.eigenvalues();
  const double max_re = ev.real().maxCoeff();
  const double rho = ev.cwiseAbs().maxCoeff();
  Stability v = Stability::stable;
  if (max_re > 0)
    v = Stability::unstable;
  else if (max_re > -tol * rho || rho == 0.0)
    v = Stability::marginal;
  return {v, max_re, rho};
}

inline bool is_hurwitz(const Matrix& a, double tol = kStabilityTolerance) {
  return check_stability(a, tol).verdict == Stability::stable;
}

/// Stability check for A of any storage. Dense matrices up to `dense_limit`
/// get a full eigensolve; larger ones get a shift-and-invert Arnoldi estimate
/// of the eigenvalues nearest the origin, which for the diffusion-dominated
/// operators here are the rightmost ones. The estimate is not a proof.
inline StabilityCheck check_stability(const StateMatrix& a, Index dense_limit = 2000,
                                      Index arnoldi_steps = 30, std::uint64_t seed = 7,
                                      double tol = kStabilityTolerance) {
  if (!a.is_sparse() && a.size() <= dense_limit) return check_stability(a.dense(), tol);
  if (a.size() <= dense_limit) return check_stability(a.to_dense(), tol);
  ComplexVector near = linalg::inverse_ritz_values(a, arnoldi_steps, seed);
  ComplexVector far = linalg::ritz_values(a, arnoldi_steps, seed + 1);
  const double max_re = near.size() ? near.real().maxCoeff() : 0.0;
  const double rho = far.size() ? far.cwiseAbs().maxCoeff() : 0.0;
  Stability v = Stability::stable;
  if (max_re > 0)
    v = Stability::unstable;
  else if (max_re > -tol * rho || rho == 0.0)
    v = Stability::marginal;
  return {v, max_re, rho};
}

enum class BiorthogonalityPolicy { reject, rebiorthogonalize };

/// Petrov-Galerkin projection  Ar = W^T A V, Br = W^T B, Cr = C V, x0r = W^T x0.
inline ReducedModel project(const LtiSystem& sys, const Matrix& v, Matrix w,
                            BiorthogonalityPolicy policy = BiorthogonalityPolicy::rebiorthogonalize,
                            double tol = 1e-10) {
  if (v.rows() != sys.N() || w.rows() != sys.N() || v.cols() != w.cols())
    throw std::invalid_argument("project: bases must both be N x n");
  const Index n = v.cols();
  Matrix wtv = w.transpose() * v;
  if ((wtv - Matrix::Identity(n, n)).norm() > tol) {
    Eigen::FullPivLU<Matrix> lu(wtv);
    if (n > 0 && lu.rank() < n)
      throw Error("core", "bases not bi-orthogonalizable (W^T V is rank deficient)");
    if (policy == BiorthogonalityPolicy::reject)
      throw Error("core", "bases are not bi-orthogonal", "enable re-biorthogonalization");
    // W <- W (V^T W)^{-1} gives W^T V = I.
    w = lu.solve(w.transpose()).transpose().eval();
  }
  ReducedModel rom;
  rom.Ar = w.transpose() * sys.A().times(v);
  rom.Br = w.transpose() * sys.B();
  rom.Cr = sys.C() * v;
  rom.x0r = w.transpose() * sys.x0();
  rom.V = v;
  rom.W = std::move(w);
  return rom;
}

/// Splits  y = y_x0 + y_u  into the uncontrolled system (A, 0, C, x0) and the
/// controlled system (A, B, C, 0).
inline std::pair<LtiSystem, LtiSystem> split_system(const LtiSystem& sys) {
  LtiSystem uncontrolled(sys.A(), Matrix::Zero(sys.N(), sys.q()), sys.C(), sys.x0());
  LtiSystem controlled(sys.A(), sys.B(), sys.C(), Vector::Zero(sys.N()));
  return {std::move(uncontrolled), std::move(controlled)};
}

}  // namespace icmor
