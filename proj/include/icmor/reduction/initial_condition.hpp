#pragma once

#include <optional>
#include <utility>

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"
#include "icmor/reduction/balanced_truncation.hpp"
#include "icmor/reduction/interpolatory.hpp"
#include "icmor/reduction/report.hpp"
#include "icmor/solvers/gramian.hpp"

namespace icmor {

enum class UncontrolledMethod { BT, IRKA, ISRK };

inline const char* to_string(UncontrolledMethod m) {
  switch (m) {
    case UncontrolledMethod::BT: return "BT";
    case UncontrolledMethod::IRKA: return "IRKA";
    case UncontrolledMethod::ISRK: return "ISRK";
  }
  return "?";
}

struct ReductionOptions {
  GramianOptions gramians{};
  InterpolationOptions interpolation{};
};

/// BT of the augmented system (A, [B, X0], C); the original system is
/// projected with the resulting bases, so x0r = W^T x0.
inline std::pair<ReducedModel, ReductionReport> bt_aug(const LtiSystem& sys, const Matrix& x0_train, Index n,
                                                       const ReductionOptions& opt = {},
                                                       const GramianFactors* q_given = nullptr) {
  if (x0_train.rows() != sys.N()) throw std::invalid_argument("bt_aug: X0 must have N rows");
  Matrix b_aug(sys.N(), sys.q() + x0_train.cols());
  b_aug << sys.B(), x0_train;
  const GramianFactors p = controllability_gramian(sys.A(), b_aug, opt.gramians);
  std::optional<GramianFactors> q_own;
  if (!q_given) q_own = observability_gramian(sys, opt.gramians);
  const GramianFactors& q = q_given ? *q_given : *q_own;
  BalancingBases bases = balancing_bases(p, q, n);
  ReducedModel rom = project(sys, bases.V, bases.W);
  ReductionReport report;
  report.method = Method::BT_aug;
  report.order = n;
  report.hankel_values = std::move(bases.hankel_values);
  report.alpha = bases.alpha;
  report.aug_alpha = bases.alpha;
  report.training_columns = x0_train.cols();
  report.stable = is_hurwitz(rom.Ar);
  return {std::move(rom), std::move(report)};
}

inline ReducedModel empty_rom(const LtiSystem& sys) {
  ReducedModel r;
  r.Ar = Matrix(0, 0);
  r.Br = Matrix(0, sys.q());
  r.Cr = Matrix(sys.p(), 0);
  r.x0r = Vector(0);
  r.V = Matrix(sys.N(), 0);
  r.W = Matrix(sys.N(), 0);
  return r;
}

/// Reduces the controlled part (A, B, C, 0) by BT to order n_c and the
/// uncontrolled part through the auxiliary system (A, X0, C) by `method` to
/// order n_uc. n_c = 0, q = 0 or B = 0 give an empty controlled ROM.
inline std::pair<SplitRom, ReductionReport> split_reduce(const LtiSystem& sys, const Matrix& x0_train,
                                                         Index n_uc, Index n_c, UncontrolledMethod method,
                                                         const ReductionOptions& opt = {},
                                                         const GramianFactors* q_given = nullptr) {
  if (x0_train.rows() != sys.N()) throw std::invalid_argument("split_reduce: X0 must have N rows");
  if (x0_train.cols() == 0) throw std::invalid_argument("split_reduce: X0 needs at least one column");
  std::optional<GramianFactors> q_own;
  if (!q_given) q_own = observability_gramian(sys, opt.gramians);
  const GramianFactors& q = q_given ? *q_given : *q_own;

  ReductionReport report;
  report.method = method == UncontrolledMethod::BT     ? Method::BT_BT
                  : method == UncontrolledMethod::IRKA ? Method::split_IRKA
                                                       : Method::split_ISRK;
  report.training_columns = x0_train.cols();
  report.seed = opt.interpolation.seed;

  SplitRom split;
  auto [uncontrolled, controlled] = split_system(sys);
  if (n_c > 0 && sys.q() > 0 && sys.B().norm() > 0) {
    const GramianFactors p = controllability_gramian(sys.A(), sys.B(), opt.gramians);
    auto [rom_c, rep_c] = balanced_truncation(controlled, n_c, p, q);
    split.controlled = std::move(rom_c);
    report.hankel_values = rep_c.hankel_values;
    report.alpha = rep_c.alpha;
    report.order_controlled = n_c;
  } else {
    split.controlled = empty_rom(sys);
    report.notes.push_back("controlled part empty (no input or n_c = 0)");
  }

  const LtiSystem aux(sys.A(), x0_train, sys.C(), sys.x0());
  ReducedModel rom_uc;
  switch (method) {
    case UncontrolledMethod::BT: {
      const GramianFactors p0 = controllability_gramian(sys.A(), x0_train, opt.gramians);
      auto [r, rep] = balanced_truncation(aux, n_uc, p0, q);
      rom_uc = std::move(r);
      report.uncontrolled_hankel_values = rep.hankel_values;
      break;
    }
    case UncontrolledMethod::IRKA: {
      auto [r, rep] = irka(aux, n_uc, opt.interpolation);
      rom_uc = std::move(r);
      report.iterations = rep.iterations;
      report.converged = rep.converged;
      report.initial_shifts = rep.initial_shifts;
      report.final_shifts = rep.final_shifts;
      if (!rep.stable)
        throw HurwitzAssumptionViolated("reduction", "IRKA produced a non-Hurwitz uncontrolled ROM");
      break;
    }
    case UncontrolledMethod::ISRK: {
      auto [r, rep] = isrk(aux, n_uc, q, opt.interpolation);
      rom_uc = std::move(r);
      report.iterations = rep.iterations;
      report.converged = rep.converged;
      report.initial_shifts = rep.initial_shifts;
      report.final_shifts = rep.final_shifts;
      report.constraint_residual_max = rep.constraint_residual_max;
      report.seed = rep.seed;
      break;
    }
  }
  rom_uc.Br = Matrix::Zero(n_uc, sys.q());
  split.uncontrolled = std::move(rom_uc);
  report.order_uncontrolled = n_uc;
  report.order = n_uc + report.order_controlled;
  report.stable = is_hurwitz(split.uncontrolled.Ar) &&
                  (split.controlled.order() == 0 || is_hurwitz(split.controlled.Ar));
  return {std::move(split), std::move(report)};
}

}  // namespace icmor
