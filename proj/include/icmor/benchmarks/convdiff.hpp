#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "icmor/core/lti_system.hpp"

namespace icmor {

/// Finite-difference convection-diffusion on the unit square,
///
///     z_t = z_{11} + z_{22} + 0.5 xi1^2 xi2 z_1,   z = 0 on the boundary,
///
/// on n_inner x n_inner inner nodes xi = (i h, j h), h = 1/(n_inner+1).
/// Unknowns are ordered with xi1 fastest: index (j-1) n_inner + (i-1).
/// Recorded in generated manifests and run provenance.
inline constexpr const char* kConvDiffDiscretization = "5-point Laplacian, central convection, node-sum output quadrature";

struct ConvDiffConfig {
  Index n_inner = 40;
  double mu = 3.0;  // initial state parameter
  std::vector<double> training_mu = default_training_mu();

  double h() const { return 1.0 / static_cast<double>(n_inner + 1); }
  Index N() const { return n_inner * n_inner; }

  static std::vector<double> default_training_mu() {
    std::vector<double> m(21);
    for (int k = 0; k <= 20; ++k) m[static_cast<std::size_t>(k)] = 2.0 + k / 20.0;
    return m;
  }
};

inline double convdiff_initial_value(double xi1, double xi2, double mu) {
  return std::pow(xi1, 0.25) * std::pow(xi2, 1.0 / mu) * (1.0 - xi1) * (1.0 - xi2) *
         (std::cos(10.0 * std::pow(xi2 + mu / 5.0, 3)) + std::exp(xi1 * xi1 * mu / (1.0 + xi1 * xi2)));
}

inline Vector convdiff_initial_state(double mu, const ConvDiffConfig& cfg) {
  if (!(mu > 0)) throw std::invalid_argument("convdiff_initial_state: mu must be positive");
  const Index m = cfg.n_inner;
  const double h = cfg.h();
  Vector x(cfg.N());
  for (Index j = 1; j <= m; ++j)
    for (Index i = 1; i <= m; ++i) x((j - 1) * m + (i - 1)) = convdiff_initial_value(i * h, j * h, mu);
  return x;
}

/// Row l (1..9) of C integrates over K_l = [9/20, 11/20] x [l/10 - 1/50, l/10 + 1/50]
/// by summing h^2 over the nodes inside the closed box.
inline Matrix convdiff_output_matrix(const ConvDiffConfig& cfg) {
  const Index m = cfg.n_inner;
  const double h = cfg.h();
  const double eps = 1e-12;
  Matrix c = Matrix::Zero(9, cfg.N());
  for (Index l = 1; l <= 9; ++l) {
    const double lo2 = l / 10.0 - 1.0 / 50.0;
    const double hi2 = l / 10.0 + 1.0 / 50.0;
    for (Index j = 1; j <= m; ++j) {
      const double xi2 = j * h;
      if (xi2 < lo2 - eps || xi2 > hi2 + eps) continue;
      for (Index i = 1; i <= m; ++i) {
        const double xi1 = i * h;
        if (xi1 < 9.0 / 20.0 - eps || xi1 > 11.0 / 20.0 + eps) continue;
        c(l - 1, (j - 1) * m + (i - 1)) = h * h;
      }
    }
  }
  return c;
}

/// 5-point Laplacian plus central differences for the convection term.
inline SparseMatrix convdiff_state_matrix(const ConvDiffConfig& cfg) {
  const Index m = cfg.n_inner;
  const double h = cfg.h();
  const double d = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * cfg.N()));
  for (Index j = 1; j <= m; ++j) {
    for (Index i = 1; i <= m; ++i) {
      const Index k = (j - 1) * m + (i - 1);
      const double xi1 = i * h;
      const double xi2 = j * h;
      const double conv = 0.5 * xi1 * xi1 * xi2 / (2.0 * h);
      trip.emplace_back(k, k, -4.0 * d);
      if (i > 1) trip.emplace_back(k, k - 1, d - conv);
      if (i < m) trip.emplace_back(k, k + 1, d + conv);
      if (j > 1) trip.emplace_back(k, k - m, d);
      if (j < m) trip.emplace_back(k, k + m, d);
    }
  }
  SparseMatrix a(cfg.N(), cfg.N());
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

struct ConvDiffProblem {
  LtiSystem system;  // q = 0, x0 = initial state at cfg.mu
  Matrix X0;         // N x (number of training parameters)
};

inline ConvDiffProblem convdiff_generate(const ConvDiffConfig& cfg) {
  if (cfg.n_inner < 3) throw std::invalid_argument("convdiff_generate: need at least 3 inner points");
  Matrix x0_train(cfg.N(), static_cast<Index>(cfg.training_mu.size()));
  for (std::size_t k = 0; k < cfg.training_mu.size(); ++k)
    x0_train.col(static_cast<Index>(k)) = convdiff_initial_state(cfg.training_mu[k], cfg);
  LtiSystem sys(StateMatrix(convdiff_state_matrix(cfg)), Matrix(cfg.N(), 0), convdiff_output_matrix(cfg),
                convdiff_initial_state(cfg.mu, cfg));
  return {std::move(sys), std::move(x0_train)};
}

}  // namespace icmor
