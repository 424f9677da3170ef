#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "icmor/core/state_matrix.hpp"

namespace icmor {

/// Input u(t) with declared discontinuity times. Piecewise-constant inputs
/// also allow matrix-exponential stepping.
class InputSignal {
 public:
  /// u == 0 (or q = 0).
  static InputSignal none() { return InputSignal(); }

  /// u(t) = amplitude on [t0, t1), 0 elsewhere.
  static InputSignal pulse(double t0, double t1, Vector amplitude) {
    if (!(t1 > t0)) throw std::invalid_argument("pulse: need t1 > t0");
    const Vector zero = Vector::Zero(amplitude.size());
    return piecewise_constant({t0, t1}, {std::move(amplitude), zero}, zero);
  }

  /// u(t) = initial for t < times[0], values[k] on [times[k], times[k+1]).
  static InputSignal piecewise_constant(std::vector<double> times, std::vector<Vector> values, Vector initial) {
    if (times.size() != values.size()) throw std::invalid_argument("piecewise_constant: size mismatch");
    if (!std::is_sorted(times.begin(), times.end()))
      throw std::invalid_argument("piecewise_constant: times must be ascending");
    for (const auto& v : values)
      if (v.size() != initial.size()) throw std::invalid_argument("piecewise_constant: inconsistent widths");
    InputSignal s;
    s.width_ = initial.size();
    s.breakpoints_ = times;
    s.piecewise_constant_ = true;
    auto ts = std::make_shared<std::vector<double>>(std::move(times));
    auto vs = std::make_shared<std::vector<Vector>>(std::move(values));
    s.f_ = [ts, vs, initial](double t) -> Vector {
      const auto it = std::upper_bound(ts->begin(), ts->end(), t);
      if (it == ts->begin()) return initial;
      return (*vs)[static_cast<std::size_t>(it - ts->begin()) - 1];
    };
    return s;
  }

  /// Smooth input between the given breakpoints.
  static InputSignal function(Index width, std::function<Vector(double)> f, std::vector<double> breakpoints = {}) {
    std::sort(breakpoints.begin(), breakpoints.end());
    InputSignal s;
    s.width_ = width;
    s.f_ = std::move(f);
    s.breakpoints_ = std::move(breakpoints);
    return s;
  }

  bool is_zero() const { return !f_; }
  bool is_piecewise_constant() const { return is_zero() || piecewise_constant_; }
  Index width() const { return width_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  Vector operator()(double t) const { return f_ ? f_(t) : Vector(); }

 private:
  Index width_ = 0;
  std::function<Vector(double)> f_;
  std::vector<double> breakpoints_;
  bool piecewise_constant_ = false;
};

}  // namespace icmor
