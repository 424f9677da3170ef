#pragma once

// Test-only reference implementations and random instance generators.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "icmor/core/lti_system.hpp"

namespace icmor::test {

using Rng = std::mt19937_64;

inline Matrix gaussian(Rng& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

inline Vector gaussian_vector(Rng& rng, Index n) { return gaussian(rng, n, 1).col(0); }

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

inline Matrix random_orthogonal(Rng& rng, Index n) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// A = V (D + E) V^T with V orthogonal, D block diagonal (real eigenvalues and
/// 2x2 rotation blocks, real parts in [re_min, re_max]) and E strictly upper
/// triangular of size `coupling`. Spectrum is that of D.
inline Matrix random_stable_matrix(Rng& rng, Index n, double re_min = -20.0, double re_max = -0.5,
                                   double coupling = 0.3) {
  Matrix d = Matrix::Zero(n, n);
  Index i = 0;
  while (i < n) {
    const double re = -std::exp(uniform(rng, std::log(-re_max), std::log(-re_min)));
    if (i + 1 < n && uniform(rng, 0, 1) < 0.3) {
      const double im = uniform(rng, 0.1, 5.0);
      d(i, i) = re;
      d(i + 1, i + 1) = re;
      d(i, i + 1) = im;
      d(i + 1, i) = -im;
      i += 2;
    } else {
      d(i, i) = re;
      i += 1;
    }
  }
  Matrix e = coupling * gaussian(rng, n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = c; r < n; ++r) e(r, c) = 0.0;
  for (Index c = 0; c + 1 < n; ++c)
    if (d(c, c + 1) != 0.0) e(c, c + 1) = 0.0;
  const Matrix v = random_orthogonal(rng, n);
  return v * (d + e) * v.transpose();
}

inline LtiSystem random_stable_system(Rng& rng, Index n, Index p, Index q, bool with_x0 = true) {
  return LtiSystem(random_stable_matrix(rng, n), gaussian(rng, n, q), gaussian(rng, p, n),
                   with_x0 ? gaussian_vector(rng, n) : Vector(Vector::Zero(n)));
}

/// Brute-force Lyapunov solve A^T X + X A = -RHS via the Kronecker form.
inline Matrix kron_lyapunov(const Matrix& a, const Matrix& rhs) {
  const Index n = a.rows();
  Matrix k = Matrix::Zero(n * n, n * n);
  const Matrix at = a.transpose();
  const Matrix id = Matrix::Identity(n, n);
  // vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += id(i, j) * at;
      k.block(i * n, j * n, n, n) += at(i, j) * id;
    }
  Vector b = -Eigen::Map<const Vector>(rhs.data(), n * n);
  Vector x = k.fullPivLu().solve(b);
  return Eigen::Map<Matrix>(x.data(), n, n);
}

/// Brute-force Sylvester solve A^T X + X Ar = RHS.
inline Matrix kron_sylvester(const Matrix& a, const Matrix& ar, const Matrix& rhs) {
  const Index n = a.rows();
  const Index m = ar.rows();
  Matrix k = Matrix::Zero(n * m, n * m);
  const Matrix at = a.transpose();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      if (i == j) k.block(i * n, j * n, n, n) += at;
      k.block(i * n, j * n, n, n) += ar(j, i) * Matrix::Identity(n, n);
    }
  Vector b = Eigen::Map<const Vector>(rhs.data(), n * m);
  Vector x = k.fullPivLu().solve(b);
  return Eigen::Map<Matrix>(x.data(), n, m);
}

/// Closed-form Gramian for diagonal A = diag(lam): X_ij = g_i g_j / (-lam_i - lam_j)
/// with RHS = g g^T.
inline Matrix diagonal_gramian(const Vector& lam, const Matrix& g) {
  const Matrix gg = g * g.transpose();
  Matrix x(lam.size(), lam.size());
  for (Index i = 0; i < lam.size(); ++i)
    for (Index j = 0; j < lam.size(); ++j) x(i, j) = gg(i, j) / (-lam(i) - lam(j));
  return x;
}

}  // namespace icmor::test
