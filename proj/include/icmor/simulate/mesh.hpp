#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "icmor/core/state_matrix.hpp"

namespace icmor {

/// Ascending output times, starting at 0 and ending at T.
struct TimeMesh {
  std::vector<double> points;

  double T() const { return points.empty() ? 0.0 : points.back(); }
  std::size_t size() const { return points.size(); }
  bool operator==(const TimeMesh& o) const { return points == o.points; }

  void validate() const {
    if (points.empty() || points.front() != 0.0) throw std::invalid_argument("TimeMesh must start at 0");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i] > points[i - 1])) throw std::invalid_argument("TimeMesh must be strictly increasing");
  }
};

/// 0 followed by `count` log-spaced points from ratio*T to T (inclusive).
inline TimeMesh make_log_mesh(double T, std::size_t count = 10000, double ratio = 1e-20) {
  if (!(T > 0) || !std::isfinite(T)) throw std::invalid_argument("make_log_mesh: T must be positive");
  if (count < 2) throw std::invalid_argument("make_log_mesh: need at least two log-spaced points");
  TimeMesh m;
  m.points.resize(count + 1);
  m.points[0] = 0.0;
  const double a = std::log10(ratio * T);
  const double b = std::log10(T);
  for (std::size_t i = 0; i < count; ++i)
    m.points[i + 1] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  m.points[1] = ratio * T;
  m.points[count] = T;
  return m;
}

inline TimeMesh make_uniform_mesh(double T, std::size_t intervals) {
  if (!(T > 0) || intervals == 0) throw std::invalid_argument("make_uniform_mesh: bad arguments");
  TimeMesh m;
  m.points.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    m.points[i] = T * static_cast<double>(i) / static_cast<double>(intervals);
  m.points[intervals] = T;
  return m;
}

/// Inserts `factor - 1` points into every interval (geometric spacing for
/// positive intervals, arithmetic for the first one).
inline TimeMesh refine_mesh(const TimeMesh& m, std::size_t factor = 2) {
  if (factor < 1) throw std::invalid_argument("refine_mesh: factor must be >= 1");
  TimeMesh r;
  r.points.reserve((m.size() - 1) * factor + 1);
  r.points.push_back(m.points[0]);
  for (std::size_t i = 1; i < m.size(); ++i) {
    const double a = m.points[i - 1];
    const double b = m.points[i];
    for (std::size_t k = 1; k < factor; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(factor);
      r.points.push_back(a > 0 ? a * std::pow(b / a, s) : a + (b - a) * s);
    }
    r.points.push_back(b);
  }
  return r;
}

}  // namespace icmor
