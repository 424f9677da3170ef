#pragma once

#include <cmath>
#include <stdexcept>

#include "icmor/core/state_matrix.hpp"
#include "icmor/simulate/integrate.hpp"
#include "icmor/simulate/mesh.hpp"

namespace icmor {

/// sqrt of the trapezoidal cumulative integral of the mesh samples s_k.
inline Vector cumulative_sqrt_integral(const std::vector<double>& t, const Vector& s) {
  Vector e(s.size());
  if (s.size() == 0) return e;
  double acc = 0.0;
  e(0) = 0.0;
  for (Index k = 1; k < s.size(); ++k) {
    acc += 0.5 * (t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)]) * (s(k) + s(k - 1));
    e(k) = std::sqrt(acc);
  }
  return e;
}

/// E(t_k) = sqrt(int_0^{t_k} ||y - yr||^2), trapezoidal rule on the mesh.
inline Vector cumulative_l2_error(const Trajectory& yf, const Trajectory& yr) {
  if (!(yf.mesh == yr.mesh)) throw std::invalid_argument("cumulative_l2_error: meshes differ");
  if (yf.y.rows() != yr.y.rows()) throw std::invalid_argument("cumulative_l2_error: output widths differ");
  const Vector sq = (yf.y - yr.y).colwise().squaredNorm().transpose();
  return cumulative_sqrt_integral(yf.mesh.points, sq);
}

/// Cumulative L2 norm of a single trajectory.
inline Vector cumulative_l2_norm(const Trajectory& y) {
  const Vector sq = y.y.colwise().squaredNorm().transpose();
  return cumulative_sqrt_integral(y.mesh.points, sq);
}

}  // namespace icmor
