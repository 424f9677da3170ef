#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "icmor/core/lti_system.hpp"
#include "icmor/reduction/report.hpp"
#include "icmor/solvers/gramian.hpp"

namespace icmor {

/// Hankel singular values from the factors P ~ Up^T Up, Q ~ Uq^T Uq: the
/// singular values of Uq Up^T, descending. Only min(rank P, rank Q) values
/// are available; the remaining ones are zero.
inline Vector hankel_singular_values(const GramianFactors& p, const GramianFactors& q) {
  if (p.N() != q.N()) throw std::invalid_argument("hankel_singular_values: factor size mismatch");
  if (p.rank() == 0 || q.rank() == 0) return Vector(0);
  Eigen::JacobiSVD<Matrix> svd(q.U * p.U.transpose());
  return svd.singularValues();
}

struct BalancingBases {
  Matrix V;
  Matrix W;
  Vector hankel_values;
  double alpha = 0.0;  // 2 * sum_{i>n} sigma_i
};

/// Square-root balancing: Uq Up^T = Z S Y^T, V = Up^T Y_n S_n^{-1/2},
/// W = Uq^T Z_n S_n^{-1/2}, so that W^T V = I_n.
inline BalancingBases balancing_bases(const GramianFactors& p, const GramianFactors& q, Index n) {
  if (n < 1) throw std::invalid_argument("balanced truncation: order must be >= 1");
  if (p.N() != q.N()) throw std::invalid_argument("balancing_bases: factor size mismatch");
  if (p.rank() == 0 || q.rank() == 0)
    throw Error("reduction", "all Hankel singular values vanish; nothing to balance",
                "the system has no observable and reachable part");
  Eigen::JacobiSVD<Matrix> svd(q.U * p.U.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (n > s.size() || s(n - 1) <= 1e-14 * s(0))
    throw Error("reduction",
                "order " + std::to_string(n) + " exceeds the numerical rank of the Gramian product (" +
                    std::to_string(s.size()) + " Hankel values available)",
                "choose a smaller order");
  if (n < s.size() && s(n - 1) - s(n) <= 1e-12 * s(n - 1))
    throw Error("reduction",
                "ambiguous truncation order " + std::to_string(n) + ": sigma_n equals sigma_{n+1}",
                "try n = " + std::to_string(n - 1) + " or n = " + std::to_string(n + 1));
  BalancingBases out;
  const Vector scale = s.head(n).cwiseSqrt().cwiseInverse();
  out.V = p.U.transpose() * svd.matrixV().leftCols(n) * scale.asDiagonal();
  out.W = q.U.transpose() * svd.matrixU().leftCols(n) * scale.asDiagonal();
  out.hankel_values = s;
  out.alpha = 2.0 * s.tail(s.size() - n).sum();
  return out;
}

/// Balanced truncation of `sys` to order n by the square-root method.
inline std::pair<ReducedModel, ReductionReport> balanced_truncation(const LtiSystem& sys, Index n,
                                                                    const GramianFactors& p,
                                                                    const GramianFactors& q) {
  if (p.side != Side::controllability || q.side != Side::observability)
    throw std::invalid_argument("balanced_truncation: expected (controllability, observability) factors");
  BalancingBases bases = balancing_bases(p, q, n);
  ReducedModel rom = project(sys, bases.V, bases.W);
  ReductionReport report;
  report.method = Method::BT;
  report.order = n;
  report.hankel_values = std::move(bases.hankel_values);
  report.alpha = bases.alpha;
  report.stable = is_hurwitz(rom.Ar);
  if (p.kind == GramianKind::low_rank || q.kind == GramianKind::low_rank)
    report.notes.push_back("low-rank Gramians: stability and the a priori bound are not guaranteed");
  return {std::move(rom), std::move(report)};
}

inline std::pair<ReducedModel, ReductionReport> balanced_truncation(const LtiSystem& sys, Index n,
                                                                    const GramianOptions& opt = {}) {
  const GramianFactors p = controllability_gramian(sys.A(), sys.B(), opt);
  const GramianFactors q = observability_gramian(sys, opt);
  return balanced_truncation(sys, n, p, q);
}

}  // namespace icmor
