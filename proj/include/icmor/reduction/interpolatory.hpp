#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "icmor/core/lti_system.hpp"
#include "icmor/linalg/arnoldi.hpp"
#include "icmor/reduction/report.hpp"
#include "icmor/solvers/gramian.hpp"

namespace icmor {

struct InterpolationOptions {
  std::optional<std::vector<Complex>> initial_shifts;  // Re > 0; conjugate-closed
  std::uint64_t seed = 1;
  double tol = 1e-6;  // relative change of the sorted shift set
  Index max_iterations = 100;
  Index ritz_steps = 20;
  Index inverse_ritz_steps = 10;
};

namespace detail {

/// n log-spaced real shifts on [min |Re lambda|, max |Re lambda|] of a small
/// Ritz set of A (both ends of the spectrum).
inline std::vector<Complex> default_shifts(const StateMatrix& a, Index n, std::uint64_t seed,
                                           Index ritz_steps, Index inverse_ritz_steps) {
  ComplexVector far = linalg::ritz_values(a, std::min(ritz_steps, a.size()), seed);
  ComplexVector near = linalg::inverse_ritz_values(a, std::min(inverse_ritz_steps, a.size()), seed + 1);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const ComplexVector* set : {&far, &near})
    for (Index i = 0; i < set->size(); ++i) {
      const double r = std::abs((*set)(i).real());
      if (r <= 0) continue;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  if (!(hi > 0)) throw Error("reduction", "could not estimate the spectrum of A for initial shifts");
  std::vector<Complex> s(n);
  if (n == 1) {
    s[0] = std::sqrt(lo * hi);
    return s;
  }
  for (Index i = 0; i < n; ++i)
    s[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return s;
}

inline bool is_real_shift(Complex s) { return std::abs(s.imag()) <= 1e-12 * std::abs(s); }

inline std::vector<Complex> sorted_shifts(std::vector<Complex> s) {
  for (auto& c : s)
    if (is_real_shift(c)) c = Complex(c.real(), 0.0);
  std::sort(s.begin(), s.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return s;
}

inline double shift_change(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  const auto sa = sorted_shifts(a);
  const auto sb = sorted_shifts(b);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    num += std::norm(sa[i] - sb[i]);
    den += std::norm(sb[i]);
  }
  return std::sqrt(num / den);
}

/// Real basis spanning the complex columns, one column per real shift and
/// (Re, Im) per conjugate pair (taken from the member with Im > 0).
inline Matrix realify(const ComplexMatrix& cols, const std::vector<Complex>& shifts) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (is_real_shift(shifts[i])) {
      out.push_back(cols.col(i).real());
    } else if (shifts[i].imag() > 0) {
      out.push_back(cols.col(i).real());
      out.push_back(cols.col(i).imag());
    }
  }
  if (out.size() != shifts.size())
    throw Error("reduction", "shift set is not closed under conjugation");
  Matrix m(cols.rows(), static_cast<Index>(out.size()));
  for (std::size_t j = 0; j < out.size(); ++j) m.col(static_cast<Index>(j)) = out[j];
  return m;
}

/// Orthonormal basis of span(m); throws when m is numerically rank deficient.
/// Columns are normalized first so that the test measures dependence, not scale.
inline Matrix orthonormalize(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) {
    const double nj = m.col(j).norm();
    if (nj > 0) m.col(j) /= nj;
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  const Vector d = qr.matrixQR().diagonal().cwiseAbs();
  if (d.size() && d.minCoeff() <= 1e-13 * d.maxCoeff())
    throw Error("reduction", "rational Krylov basis is rank deficient",
                "use a smaller order or different initial shifts");
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

/// Columns (sigma_i I - M)^{-1} G d_i with M = A or A^T.
inline ComplexMatrix shifted_columns(const StateMatrix& a, const Matrix& g, const std::vector<Complex>& s,
                                     const ComplexMatrix& dirs, bool transposed) {
  ComplexMatrix out(a.size(), static_cast<Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].imag() < 0 && !is_real_shift(s[i])) {
      out.col(static_cast<Index>(i)).setZero();  // conjugate partner, not needed
      continue;
    }
    const ComplexVector rhs = g.cast<Complex>() * dirs.col(static_cast<Index>(i));
    if (is_real_shift(s[i])) {
      ShiftedSolver<double> lu(a, -s[i].real());
      const Matrix x = transposed ? lu.solve_transposed(rhs.real()) : lu.solve(rhs.real());
      ComplexVector xc = x.col(0).cast<Complex>();
      if (rhs.imag().norm() > 0) {
        const Matrix xi = transposed ? lu.solve_transposed(rhs.imag()) : lu.solve(rhs.imag());
        xc += Complex(0, 1) * xi.col(0).cast<Complex>();
      }
      out.col(static_cast<Index>(i)) = -xc;
    } else {
      ShiftedSolver<Complex> lu(a, -s[i]);
      out.col(static_cast<Index>(i)) = -(transposed ? lu.solve_transposed(rhs) : lu.solve(rhs)).col(0);
    }
  }
  return out;
}

/// New shifts -lambda(Ar) (mirrored into the right half plane when needed)
/// and tangential directions from the eigenvectors of Ar.
struct ShiftUpdate {
  std::vector<Complex> shifts;
  ComplexMatrix b_dirs;  // q x n
  ComplexMatrix c_dirs;  // p x n
};

inline ShiftUpdate shifts_from_rom(const Matrix& ar, const Matrix& br, const Matrix& cr) {
  Eigen::EigenSolver<Matrix> es(ar);
  if (es.info() != Eigen::Success) throw Error("reduction", "eigensolver failed on the reduced matrix");
  const ComplexVector lam = es.eigenvalues();
  const ComplexMatrix x = es.eigenvectors();
  ShiftUpdate u;
  for (Index i = 0; i < lam.size(); ++i) {
    Complex s = -lam(i);
    if (s.real() <= 0) s = Complex(std::max(std::abs(s.real()), 1e-14 * std::abs(s)), s.imag());
    if (is_real_shift(s)) s = Complex(s.real(), 0.0);
    u.shifts.push_back(s);
  }
  Eigen::PartialPivLU<ComplexMatrix> lu(x);
  u.b_dirs = lu.solve(br.cast<Complex>()).transpose();
  u.c_dirs = cr.cast<Complex>() * x;
  return u;
}

/// Initial tangential directions: the singular vectors of m (right for B,
/// left for C) with nonnegligible singular values, cycled over the shifts.
/// A single repeated direction gives numerically rank deficient bases when
/// m has smooth columns. Conjugate pairs share one direction.
inline ComplexMatrix initial_directions(const Matrix& m, const std::vector<Complex>& s, bool right) {
  const Index n = static_cast<Index>(s.size());
  const Index dim = right ? m.cols() : m.rows();
  ComplexMatrix d(dim, n);
  if (dim == 0) return d;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix basis = right ? Matrix(svd.matrixV()) : Matrix(svd.matrixU());
  const Vector& sv = svd.singularValues();
  Index r = 1;
  while (r < sv.size() && sv(r) > 1e-12 * sv(0)) ++r;
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    const bool partner = i > 0 && !is_real_shift(s[i]) && std::abs(s[i] - std::conj(s[i - 1])) <= 1e-12 * std::abs(s[i]);
    if (partner) {
      d.col(i) = d.col(i - 1);
      continue;
    }
    d.col(i) = basis.col(k % r).cast<Complex>();
    ++k;
  }
  return d;
}

/// Mirrored Ritz values of A from n Arnoldi steps on A^{-1} started at B v1,
/// v1 the dominant right singular vector of B. These follow the part of the
/// spectrum the input excites. If the Krylov space is exhausted early the
/// rest is filled with log-spaced shifts.
inline std::vector<Complex> krylov_shifts(const LtiSystem& sys, Index n, std::uint64_t seed,
                                          const InterpolationOptions& opt) {
  Eigen::JacobiSVD<Matrix> svd(sys.B(), Eigen::ComputeThinV);
  const Vector start = sys.B() * svd.matrixV().col(0);
  const ComplexVector lam = linalg::inverse_ritz_values(sys.A(), start, n);
  std::vector<Complex> s;
  for (Index i = 0; i < lam.size(); ++i) {
    Complex m = -lam(i);
    if (m.real() <= 0) m = Complex(std::max(std::abs(m.real()), 1e-14 * std::abs(m)), m.imag());
    if (is_real_shift(m)) m = Complex(m.real(), 0.0);
    s.push_back(m);
  }
  if (static_cast<Index>(s.size()) < n) {
    const auto fill = default_shifts(sys.A(), n - static_cast<Index>(s.size()), seed, opt.ritz_steps,
                                     opt.inverse_ritz_steps);
    s.insert(s.end(), fill.begin(), fill.end());
  }
  return s;
}

/// Scales each real shift and each conjugate pair by its own factor in [0.5, 2].
inline std::vector<Complex> perturb_shifts(const std::vector<Complex>& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> factor(0.5, 2.0);
  std::vector<Complex> out;
  for (const Complex& c : s) {
    if (is_real_shift(c)) {
      out.push_back(c * factor(rng));
    } else if (c.imag() > 0) {
      const Complex p = c * factor(rng);
      out.push_back(p);
      out.push_back(std::conj(p));
    }
  }
  return out;
}

inline std::vector<Complex> initial_shifts(const LtiSystem& sys, Index n, const InterpolationOptions& opt,
                                           std::uint64_t seed) {
  if (opt.initial_shifts) {
    if (static_cast<Index>(opt.initial_shifts->size()) != n)
      throw std::invalid_argument("initial_shifts must have n entries");
    return *opt.initial_shifts;
  }
  return krylov_shifts(sys, n, seed, opt);
}

inline void check_order(const LtiSystem& sys, Index n) {
  if (n < 1) throw std::invalid_argument("reduction order must be >= 1");
  if (n > sys.N()) throw std::invalid_argument("reduction order exceeds the state dimension");
}

}  // namespace detail

/// Tangential IRKA. Bases from shifted solves with B (right) and C^T (left);
/// shifts and directions are updated from the ROM eigendecomposition until the
/// sorted shift set stagnates.
inline std::pair<ReducedModel, ReductionReport> irka(const LtiSystem& sys, Index n,
                                                     const InterpolationOptions& opt = {}) {
  detail::check_order(sys, n);
  if (sys.q() == 0 || sys.p() == 0)
    throw Error("reduction", "IRKA needs at least one input and one output");
  ReductionReport report;
  report.method = Method::IRKA;
  report.order = n;
  report.seed = opt.seed;
  report.converged = false;

  std::vector<Complex> s = detail::initial_shifts(sys, n, opt, opt.seed);
  report.initial_shifts = s;
  ComplexMatrix bd = detail::initial_directions(sys.B(), s, true);
  ComplexMatrix cd = detail::initial_directions(sys.C(), s, false);

  Matrix v, w;
  ReducedModel rom;
  for (Index it = 1; it <= opt.max_iterations; ++it) {
    v = detail::orthonormalize(detail::realify(detail::shifted_columns(sys.A(), sys.B(), s, bd, false), s));
    w = detail::orthonormalize(
        detail::realify(detail::shifted_columns(sys.A(), sys.C().transpose(), s, cd, true), s));
    rom = project(sys, v, w);
    report.iterations = it;
    report.final_shifts = s;
    detail::ShiftUpdate up = detail::shifts_from_rom(rom.Ar, rom.Br, rom.Cr);
    const double change = detail::shift_change(up.shifts, s);
    s = std::move(up.shifts);
    bd = std::move(up.b_dirs);
    cd = std::move(up.c_dirs);
    if (change < opt.tol) {
      report.converged = true;
      break;
    }
  }
  report.stable = is_hurwitz(rom.Ar);
  if (!report.converged) report.notes.push_back("maximum iterations reached; last iterate returned");
  if (!report.stable) report.notes.push_back("ROM is not Hurwitz");
  return {std::move(rom), std::move(report)};
}

/// ISRK: rational Krylov V from shifted solves with B, and the Gramian-based
/// left basis W = Q V (V^T Q V)^{-1} with Q ~ U^T U. V is rescaled so that
/// U V has orthonormal columns; then V^T Q V = I and W = U^T (U V).
inline std::pair<ReducedModel, ReductionReport> isrk(const LtiSystem& sys, Index n, const GramianFactors& q,
                                                     const InterpolationOptions& opt = {}) {
  detail::check_order(sys, n);
  if (sys.q() == 0) throw Error("reduction", "ISRK needs at least one input column");
  if (q.side != Side::observability || q.N() != sys.N())
    throw std::invalid_argument("isrk: expected the observability Gramian of sys");
  if (q.rank() < n)
    throw Error("reduction",
                "order " + std::to_string(n) + " exceeds the rank " + std::to_string(q.rank()) +
                    " of the observability Gramian factor",
                q.rank() == 0 ? "the output matrix is zero or unobservable" : "choose a smaller order");
  ReductionReport report;
  report.method = Method::ISRK;
  report.order = n;
  report.seed = opt.seed;
  report.converged = false;

  std::uint64_t seed = opt.seed;
  std::vector<Complex> s = detail::initial_shifts(sys, n, opt, seed);
  report.initial_shifts = s;
  ComplexMatrix bd = detail::initial_directions(sys.B(), s, true);
  bool reseeded = false;

  ReducedModel rom;
  for (Index it = 1; it <= opt.max_iterations; ++it) {
    Matrix v = detail::orthonormalize(detail::realify(detail::shifted_columns(sys.A(), sys.B(), s, bd, false), s));
    const Matrix uv = q.U * v;
    Eigen::HouseholderQR<Matrix> qr(uv);
    const Vector d = uv.rows() >= n ? Vector(qr.matrixQR().diagonal().cwiseAbs()) : Vector(Vector::Zero(n));
    if (uv.rows() < n || d.minCoeff() <= 1e-13 * d.maxCoeff()) {
      if (reseeded)
        throw Error("reduction", "V^T Q V is numerically singular after re-seeding",
                    "the order may exceed the numerical rank of the observability Gramian");
      reseeded = true;
      seed += 1000;
      s = detail::perturb_shifts(detail::krylov_shifts(sys, n, seed, opt), seed);
      report.notes.push_back("V^T Q V singular; shifts re-seeded with seed " + std::to_string(seed));
      report.initial_shifts = s;
      bd = detail::initial_directions(sys.B(), s, true);
      continue;
    }
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    v = r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(v);  // V R^{-1}
    const Matrix uv_scaled = q.U * v;
    const Matrix m = uv_scaled.transpose() * uv_scaled;  // ~ I
    const Matrix qv = q.U.transpose() * uv_scaled;
    Matrix w = Eigen::LLT<Matrix>(m).solve(qv.transpose()).transpose();
    rom = project(sys, v, w);
    const Matrix w_ref = qv * Eigen::PartialPivLU<Matrix>(m).inverse();
    report.constraint_residual_max =
        std::max(report.constraint_residual_max, (*rom.W - w_ref).norm() / rom.W->norm());
    report.iterations = it;
    report.final_shifts = s;
    detail::ShiftUpdate up = detail::shifts_from_rom(rom.Ar, rom.Br, rom.Cr);
    const double change = detail::shift_change(up.shifts, s);
    s = std::move(up.shifts);
    bd = std::move(up.b_dirs);
    if (change < opt.tol) {
      report.converged = true;
      break;
    }
  }
  report.seed = seed;
  report.stable = is_hurwitz(rom.Ar);
  if (!report.converged) report.notes.push_back("maximum iterations reached; last iterate returned");
  if (!report.stable) report.notes.push_back("ROM is not Hurwitz");
  return {std::move(rom), std::move(report)};
}

}  // namespace icmor
