#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "icmor/core/error.hpp"

namespace icmor {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// System matrix A, stored either dense or sparse. Immutable once built.
class StateMatrix {
 public:
  StateMatrix() : data_(Matrix(0, 0)) {}
  explicit StateMatrix(Matrix dense) : data_(std::move(dense)) { check_square(); }
  explicit StateMatrix(SparseMatrix sparse) : data_(std::move(sparse)) {
    std::get<SparseMatrix>(data_).makeCompressed();
    check_square();
  }

  Index size() const {
    return std::visit([](const auto& m) { return m.rows(); }, data_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }

  const Matrix& dense() const { return std::get<Matrix>(data_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(data_); }

  Matrix to_dense() const {
    if (is_sparse()) return Matrix(sparse());
    return dense();
  }
  SparseMatrix to_sparse() const {
    if (is_sparse()) return sparse();
    return dense().sparseView();
  }

  /// A * X
  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> times(
      const Eigen::MatrixBase<Derived>& x) const {
    using S = typename Derived::Scalar;
    if (is_sparse()) return sparse().template cast<S>() * x;
    return dense().template cast<S>() * x;
  }

  /// A^T * X
  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> transpose_times(
      const Eigen::MatrixBase<Derived>& x) const {
    using S = typename Derived::Scalar;
    if (is_sparse()) return sparse().transpose().template cast<S>() * x;
    return dense().transpose().template cast<S>() * x;
  }

  /// out = A * x without temporaries; used in the integrator inner loop.
  void apply(const Vector& x, Vector& out) const {
    if (is_sparse())
      out.noalias() = sparse() * x;
    else
      out.noalias() = dense() * x;
  }

  double frobenius_norm() const {
    return std::visit([](const auto& m) { return m.norm(); }, data_);
  }

  bool all_finite() const {
    if (is_sparse()) {
      const auto& s = sparse();
      for (Index k = 0; k < s.nonZeros(); ++k)
        if (!std::isfinite(s.valuePtr()[k])) return false;
      return true;
    }
    return dense().allFinite();
  }

 private:
  void check_square() const {
    std::visit(
        [](const auto& m) {
          if (m.rows() != m.cols()) throw std::invalid_argument("StateMatrix: A must be square");
        },
        data_);
  }

  std::variant<Matrix, SparseMatrix> data_;
};

/// LU factorization of A + shift*I (dense or sparse, real or complex).
/// solve() handles (A + sI) x = b, solve_transposed() handles (A^T + sI) x = b.
template <typename Scalar>
class ShiftedSolver {
 public:
  using DenseS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using SparseS = Eigen::SparseMatrix<Scalar>;

  ShiftedSolver(const StateMatrix& a, Scalar shift) : n_(a.size()) {
    if (a.is_sparse()) {
      SparseS m = a.sparse().template cast<Scalar>();
      SparseS id(n_, n_);
      id.setIdentity();
      m += shift * id;
      m.makeCompressed();
      auto lu = std::make_shared<Eigen::SparseLU<SparseS>>();
      lu->analyzePattern(m);
      lu->factorize(m);
      if (lu->info() != Eigen::Success) throw_singular();
      sparse_lu_ = std::move(lu);
    } else {
      DenseS m = a.dense().template cast<Scalar>();
      m.diagonal().array() += shift;
      dense_lu_ = std::make_shared<Eigen::PartialPivLU<DenseS>>(m);
      const double rc = dense_lu_->rcond();
      if (!(rc > 1e3 * std::numeric_limits<double>::epsilon())) throw_singular();
    }
  }

  template <typename Derived>
  DenseS solve(const Eigen::MatrixBase<Derived>& rhs) const {
    DenseS b = rhs.template cast<Scalar>();
    DenseS x = sparse_lu_ ? DenseS(sparse_lu_->solve(b)) : DenseS(dense_lu_->solve(b));
    if (!x.allFinite()) throw_singular();
    return x;
  }

  template <typename Derived>
  DenseS solve_transposed(const Eigen::MatrixBase<Derived>& rhs) const {
    DenseS b = rhs.template cast<Scalar>();
    DenseS x = sparse_lu_ ? DenseS(sparse_lu_->transpose().solve(b))
                          : DenseS(dense_lu_->transpose().solve(b));
    if (!x.allFinite()) throw_singular();
    return x;
  }

 private:
  [[noreturn]] static void throw_singular() {
    throw Error("linalg", "shifted system A + sI is numerically singular");
  }

  Index n_;
  std::shared_ptr<Eigen::SparseLU<SparseS>> sparse_lu_;
  std::shared_ptr<Eigen::PartialPivLU<DenseS>> dense_lu_;
};

}  // namespace icmor
