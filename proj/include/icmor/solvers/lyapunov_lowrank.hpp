#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "icmor/core/state_matrix.hpp"
#include "icmor/linalg/arnoldi.hpp"
#include "icmor/solvers/lyapunov_dense.hpp"
#include "icmor/solvers/residual.hpp"

namespace icmor::solvers {

struct LowRankOptions {
  double tol = 1e-10;
  Index max_rank = -1;  // < 0: min(N, 400)
  Index max_iterations = 400;
  Index num_shifts = 16;
  Index ritz_steps = 30;          // Arnoldi steps on A
  Index inverse_ritz_steps = 20;  // Arnoldi steps on A^{-1}
  double compression_tol = 1e-9;  // drop factor directions below this fraction of the largest
  std::uint64_t seed = 1;
};

struct LowRankResult {
  Matrix U;  // m x N with X ~ U^T U
  double residual = 0.0;
  bool tolerance_reached = true;
  Index iterations = 0;
  std::vector<Complex> shifts;
};

namespace detail {

/// Penzl's heuristic: greedily pick shifts from a candidate set so that the
/// ADI rational function  prod |(t - p) / (t + p)|  is small on the set.
inline std::vector<Complex> penzl_shifts(const std::vector<Complex>& candidates, Index count) {
  std::vector<Complex> pool;
  for (Complex c : candidates) {
    if (c.real() >= 0) continue;
    if (std::abs(c.imag()) <= 1e-12 * std::abs(c)) c = Complex(c.real(), 0.0);
    pool.push_back(c);
  }
  std::vector<Complex> chosen;
  if (pool.empty()) return chosen;
  auto add = [&](Complex p) {
    chosen.push_back(p);
    if (p.imag() != 0.0) chosen.push_back(std::conj(p));
  };
  auto ratio = [](Complex t, Complex p) { return std::abs((t - p) / (t + p)); };

  Complex first = pool.front();
  double best = std::numeric_limits<double>::infinity();
  for (Complex p : pool) {
    double worst = 0.0;
    for (Complex t : pool) worst = std::max(worst, ratio(t, p));
    if (worst < best) {
      best = worst;
      first = p;
    }
  }
  add(first);
  while (static_cast<Index>(chosen.size()) < count) {
    Complex next = pool.front();
    double worst = -1.0;
    for (Complex t : pool) {
      double v = 1.0;
      for (Complex p : chosen) v *= ratio(t, p);
      if (v > worst) {
        worst = v;
        next = t;
      }
    }
    if (worst <= 0.0) break;
    add(next);
  }
  return chosen;
}

/// Rank-revealing recompression of a factor Z (N x k) so that Z Z^T is kept up
/// to directions with singular value below tol * sigma_max.
inline Matrix compress_columns(const Matrix& z, double tol, Index max_rank) {
  if (z.cols() == 0) return z;
  Eigen::HouseholderQR<Matrix> qr(z);
  const Index k = std::min(z.rows(), z.cols());
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index keep = 0;
  while (keep < s.size() && s(keep) > tol * s(0)) ++keep;
  keep = std::min(keep, max_rank);
  Matrix q = qr.householderQ() * Matrix::Identity(z.rows(), k);
  return q * svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal();
}

}  // namespace detail

/// Low-rank ADI iteration for  A^T X + X A = -G^T G  (observability side) or
/// A X + X A^T = -G^T G  (controllability side, G = B^T), returning U with
/// X ~ U^T U. Complex shift pairs are handled in real arithmetic; the
/// residual factor W with  residual = W W^T  gives a cheap stopping test.
/// When the tolerance is not met the best factor is returned with
/// tolerance_reached = false.
inline LowRankResult solve_lyapunov_lowrank(const StateMatrix& a, const Matrix& g, Side side,
                                            const LowRankOptions& opt = {}) {
  const Index n = a.size();
  if (g.cols() != n) throw std::invalid_argument("solve_lyapunov_lowrank: G must have N columns");
  const Index max_rank = opt.max_rank < 0 ? std::min<Index>(n, 400) : opt.max_rank;
  LowRankResult out;
  const double rhs_norm = (g * g.transpose()).norm();
  if (g.rows() == 0 || rhs_norm == 0.0) {
    out.U = Matrix(0, n);
    return out;
  }

  // M X + X M^T = -F F^T with M = A^T (observability) or A.
  const bool transposed = side == Side::observability;
  std::vector<Complex> candidates;
  {
    ComplexVector far = linalg::ritz_values(a, opt.ritz_steps, opt.seed);
    ComplexVector near = linalg::inverse_ritz_values(a, opt.inverse_ritz_steps, opt.seed + 1);
    for (Index i = 0; i < far.size(); ++i) candidates.push_back(far(i));
    for (Index i = 0; i < near.size(); ++i) candidates.push_back(near(i));
  }
  out.shifts = detail::penzl_shifts(candidates, opt.num_shifts);
  if (out.shifts.empty())
    throw Error("solvers", "no stable Ritz values available for ADI shifts", "is A Hurwitz?");

  Matrix w = g.transpose();
  Matrix z(n, 0);
  auto append = [&z](const Matrix& block) {
    Matrix grown(z.rows(), z.cols() + block.cols());
    grown << z, block;
    z.swap(grown);
  };
  auto shifted = [&](auto& lu, const auto& rhs) {
    return transposed ? lu.solve_transposed(rhs) : lu.solve(rhs);
  };

  // Shifts are reused cyclically, so factorizations are cached per shift.
  std::vector<std::optional<ShiftedSolver<double>>> real_lu(out.shifts.size());
  std::vector<std::optional<ShiftedSolver<Complex>>> complex_lu(out.shifts.size());

  double res = 1.0;
  std::size_t k = 0;
  Index iter = 0;
  while (iter < opt.max_iterations) {
    const Complex p = out.shifts[k];
    if (p.imag() == 0.0) {
      if (!real_lu[k]) real_lu[k].emplace(a, p.real());
      Matrix v = shifted(*real_lu[k], w);
      w -= 2.0 * p.real() * v;
      append(std::sqrt(-2.0 * p.real()) * v);
      k = (k + 1) % out.shifts.size();
      iter += 1;
    } else {
      if (!complex_lu[k]) complex_lu[k].emplace(a, p);
      ComplexMatrix v = shifted(*complex_lu[k], w);
      const double gamma = 2.0 * std::sqrt(-p.real());
      const double delta = p.real() / p.imag();
      Matrix vr = v.real() + delta * v.imag();
      w += gamma * gamma * vr;
      append(gamma * vr);
      append(gamma * std::sqrt(delta * delta + 1.0) * Matrix(v.imag()));
      k = (k + 2) % out.shifts.size();
      iter += 2;
    }
    res = (w.transpose() * w).norm() / rhs_norm;
    if (res < opt.tol) break;
    if (z.cols() > 2 * max_rank) z = detail::compress_columns(z, opt.compression_tol, z.rows());
  }
  out.iterations = iter;
  z = detail::compress_columns(z, opt.compression_tol, max_rank);
  out.U = z.transpose();
  out.residual = lyapunov_residual_lowrank(a, out.U, g, side);
  out.tolerance_reached = out.residual <= opt.tol;
  return out;
}

}  // namespace icmor::solvers
