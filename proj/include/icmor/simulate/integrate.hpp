#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"
#include "icmor/simulate/input.hpp"
#include "icmor/simulate/mesh.hpp"

namespace icmor {

enum class IntegrationMode { adaptive, exponential };

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  IntegrationMode mode = IntegrationMode::adaptive;
  double max_step = std::numeric_limits<double>::infinity();
  Index max_steps = 100'000'000;
  Index exponential_limit = 500;  // largest state dimension for exponential mode
};

/// Output samples y(t_k) on a mesh, p x mesh.size().
struct Trajectory {
  TimeMesh mesh;
  Matrix y;
  double rtol = 0.0;
  double atol = 0.0;
  IntegrationMode mode = IntegrationMode::adaptive;
  Index steps = 0;
  Index rejected = 0;
  Vector final_state;
};

namespace detail {

// Dormand-Prince 5(4) coefficients with Hairer's dense output.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

class LtiRhs {
 public:
  LtiRhs(const LtiSystem& sys, const InputSignal& u) : sys_(sys), u_(u) {
    if (!u.is_zero() && u.width() != sys.q())
      throw std::invalid_argument("integrate_lti: input width does not match B");
  }

  /// f(t, x) = A x + B u(t); the input is evaluated as its left limit at the
  /// segment end so that jumps at breakpoints are never sampled early.
  void operator()(double t, const Vector& x, Vector& out) const {
    sys_.A().apply(x, out);
    if (!u_.is_zero() && sys_.q() > 0) out.noalias() += sys_.B() * u_(std::min(t, seg_end_));
  }

  void set_segment_end(double tb) { seg_end_ = std::nextafter(tb, -std::numeric_limits<double>::infinity()); }

 private:
  const LtiSystem& sys_;
  const InputSignal& u_;
  double seg_end_ = std::numeric_limits<double>::infinity();
};

inline double error_norm(const Vector& e, const Vector& y0, const Vector& y1, double rtol, double atol) {
  const Index n = e.size();
  if (n == 0) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = e(i) / sc;
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(n));
}

inline std::vector<double> segment_ends(const InputSignal& u, double T) {
  std::vector<double> ends;
  for (double b : u.breakpoints())
    if (b > 0 && b < T) ends.push_back(b);
  ends.push_back(T);
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  return ends;
}

inline Trajectory integrate_adaptive(const LtiSystem& sys, const InputSignal& u, const TimeMesh& mesh,
                                     const IntegratorOptions& opt) {
  using D = Dopri5;
  const Index n = sys.N();
  const double rtol = opt.rtol;
  const double atol = opt.atol;
  Trajectory tr;
  tr.mesh = mesh;
  tr.rtol = rtol;
  tr.atol = atol;
  tr.mode = IntegrationMode::adaptive;
  tr.y.resize(sys.p(), static_cast<Index>(mesh.size()));

  LtiRhs f(sys, u);
  Vector x = sys.x0();
  tr.y.col(0) = sys.C() * x;
  std::size_t next_out = 1;
  if (n == 0) {
    tr.y.setZero();
    tr.final_state = x;
    return tr;
  }

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xn(n), err(n);
  double t = 0.0;
  double h = 0.0;
  for (double tb : segment_ends(u, mesh.T())) {
    f.set_segment_end(tb);
    f(t, x, k1);
    if (h == 0.0) {
      // initial step guess (Hairer & Wanner)
      double d0 = error_norm(x, x, x, rtol, atol);
      double d1 = error_norm(k1, x, x, rtol, atol);
      double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
      h0 = std::min(h0, tb - t);
      xs = x + h0 * k1;
      f(t + h0, xs, k2);
      const double d2 = error_norm(k2 - k1, x, x, rtol, atol) / h0;
      const double dm = std::max(d1, d2);
      const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
      h = std::min(100 * h0, h1);
    }
    bool last = false;
    bool rejected_before = false;
    while (!last) {
      h = std::min(h, opt.max_step);
      if (t + h >= tb - 1e-14 * std::abs(tb)) {
        h = tb - t;
        last = true;
      }
      if (!(h > 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))) {
        std::ostringstream os;
        os << "step size underflow at t = " << t;
        throw Error("simulate", os.str(), "the system may be too stiff for the explicit integrator");
      }
      if (tr.steps + tr.rejected >= opt.max_steps) {
        std::ostringstream os;
        os << "maximum number of steps exceeded at t = " << t;
        throw Error("simulate", os.str(), "raise max_steps or loosen the tolerances");
      }
      xs = x + h * (D::a21 * k1);
      f(t + D::c2 * h, xs, k2);
      xs = x + h * (D::a31 * k1 + D::a32 * k2);
      f(t + D::c3 * h, xs, k3);
      xs = x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3);
      f(t + D::c4 * h, xs, k4);
      xs = x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4);
      f(t + D::c5 * h, xs, k5);
      xs = x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5);
      f(t + h, xs, k6);
      xn = x + h * (D::a71 * k1 + D::a73 * k3 + D::a74 * k4 + D::a75 * k5 + D::a76 * k6);
      f(t + h, xn, k7);
      err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
      const double en = error_norm(err, x, xn, rtol, atol);
      if (!std::isfinite(en)) throw Error("simulate", "non-finite state encountered");
      if (en <= 1.0) {
        const double t_new = last ? tb : t + h;
        // dense output on the mesh points inside (t, t_new]
        if (next_out < mesh.size() && mesh.points[next_out] <= t_new) {
          const Vector r1 = sys.C() * x;
          const Vector r2 = sys.C() * (xn - x);
          const Vector r3 = h * (sys.C() * k1) - r2;
          const Vector r4 = r2 - h * (sys.C() * k7) - r3;
          const Vector r5 =
              h * (sys.C() * (D::d1 * k1 + D::d3 * k3 + D::d4 * k4 + D::d5 * k5 + D::d6 * k6 + D::d7 * k7));
          while (next_out < mesh.size() && mesh.points[next_out] <= t_new) {
            const double th = std::clamp((mesh.points[next_out] - t) / h, 0.0, 1.0);
            const double th1 = 1.0 - th;
            tr.y.col(static_cast<Index>(next_out)) = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
            ++next_out;
          }
        }
        x.swap(xn);
        k1.swap(k7);
        t = t_new;
        ++tr.steps;
        const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, rejected_before ? 1.0 : 5.0);
        rejected_before = false;
        if (!last) h *= fac;
      } else {
        last = false;
        rejected_before = true;
        ++tr.rejected;
        h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      }
    }
  }
  while (next_out < mesh.size()) tr.y.col(static_cast<Index>(next_out++)) = sys.C() * x;
  tr.final_state = x;
  return tr;
}

/// Exact stepping x(t+h) = e^{hA} x + h phi1(hA) B u for piecewise-constant u,
/// through the exponential of the augmented matrix [[A, B u], [0, 0]].
inline Trajectory integrate_exponential(const LtiSystem& sys, const InputSignal& u, const TimeMesh& mesh,
                                        const IntegratorOptions& opt) {
  if (sys.N() > opt.exponential_limit)
    throw Error("simulate", "exponential mode limited to state dimension " + std::to_string(opt.exponential_limit));
  if (!u.is_piecewise_constant())
    throw Error("simulate", "exponential mode needs a piecewise-constant input");
  const Index n = sys.N();
  const Matrix a = sys.A().to_dense();
  Trajectory tr;
  tr.mesh = mesh;
  tr.mode = IntegrationMode::exponential;
  tr.y.resize(sys.p(), static_cast<Index>(mesh.size()));

  std::vector<double> events(mesh.points.begin(), mesh.points.end());
  for (double b : u.breakpoints())
    if (b > 0 && b < mesh.T()) events.push_back(b);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  Vector x = sys.x0();
  tr.y.col(0) = sys.C() * x;
  std::size_t next_out = 1;
  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a;
  for (std::size_t i = 1; i < events.size(); ++i) {
    const double t0 = events[i - 1];
    const double h = events[i] - t0;
    Vector bu = Vector::Zero(n);
    if (!u.is_zero() && sys.q() > 0) bu = sys.B() * u(0.5 * (t0 + events[i]));
    aug.topRightCorner(n, 1) = bu;
    const Matrix e = (h * aug).exp();
    x = (e.topLeftCorner(n, n) * x + e.topRightCorner(n, 1)).eval();
    ++tr.steps;
    if (next_out < mesh.size() && mesh.points[next_out] == events[i])
      tr.y.col(static_cast<Index>(next_out++)) = sys.C() * x;
  }
  tr.final_state = x;
  return tr;
}

}  // namespace detail

/// Simulates the output of `sys` on the mesh.
inline Trajectory integrate_lti(const LtiSystem& sys, const InputSignal& u, const TimeMesh& mesh,
                                const IntegratorOptions& opt = {}) {
  mesh.validate();
  return opt.mode == IntegrationMode::adaptive ? detail::integrate_adaptive(sys, u, mesh, opt)
                                               : detail::integrate_exponential(sys, u, mesh, opt);
}

inline Trajectory integrate_lti(const ReducedModel& rom, const InputSignal& u, const TimeMesh& mesh,
                                const IntegratorOptions& opt = {}) {
  return integrate_lti(rom.as_system(), u, mesh, opt);
}

/// Output of a split ROM: uncontrolled part (zero input) plus controlled part.
inline Trajectory integrate_lti(const SplitRom& rom, const InputSignal& u, const TimeMesh& mesh,
                                const IntegratorOptions& opt = {}) {
  Trajectory a = integrate_lti(rom.uncontrolled, InputSignal::none(), mesh, opt);
  if (rom.controlled.order() > 0 && !u.is_zero()) {
    const Trajectory b = integrate_lti(rom.controlled, u, mesh, opt);
    a.y += b.y;
    a.steps += b.steps;
    a.rejected += b.rejected;
  }
  return a;
}

/// Smallest T (doubling from T0) with ||x(T)|| <= tol ||x0|| for the
/// uncontrolled system, capped at T_max. Returns T_max if the cap is hit.
inline double decay_horizon(const LtiSystem& sys, double tol = 1e-9, double T0 = 1.0, double T_max = 1e6,
                            const IntegratorOptions& opt = {}) {
  const double x0n = sys.x0().norm();
  if (x0n == 0.0) return 0.0;
  const LtiSystem free(sys.A(), Matrix::Zero(sys.N(), sys.q()), sys.C(), sys.x0());
  double T = T0;
  while (true) {
    TimeMesh m{{0.0, T}};
    const Trajectory tr = integrate_lti(free, InputSignal::none(), m, opt);
    if (tr.final_state.norm() <= tol * x0n || T >= T_max) return std::min(T, T_max);
    T *= 2.0;
  }
}

}  // namespace icmor
