#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"
#include "icmor/io/matrix_market.hpp"
#include "icmor/simulate/input.hpp"

namespace icmor {

enum class BeamCase { trained, not_trained };

struct BeamScenario {
  LtiSystem system;  // x0 set per case
  Matrix X0;         // N x 2 training matrix
  BeamCase which = BeamCase::trained;
  double T = 1000.0;
  InputSignal u;
  Vector v0;  // trained case coefficients, x0 = X0 v0
};

/// Directory holding the beam data: explicit path, else $ICMOR_DATA_DIR/beam,
/// else $ICMOR_DATA_DIR.
inline std::filesystem::path beam_data_dir(const std::string& path = "") {
  namespace fs = std::filesystem;
  if (!path.empty()) return path;
  if (const char* env = std::getenv("ICMOR_DATA_DIR")) {
    const fs::path base(env);
    if (fs::exists(base / "beam" / "A.mtx")) return base / "beam";
    return base;
  }
  return fs::path("data") / "beam";
}

inline bool beam_data_available(const std::string& path = "") {
  const auto dir = beam_data_dir(path);
  return std::filesystem::exists(dir / "A.mtx") && std::filesystem::exists(dir / "B.mtx") &&
         std::filesystem::exists(dir / "C.mtx");
}

/// Loads the SLICOT beam model (A.mtx, B.mtx, C.mtx) and sets up one of the
/// two scenarios. X0 has X0(5,1) = 1 and X0(101,2) = 100 (1-based).
inline BeamScenario beam_load_scenario(const std::string& path, BeamCase which, std::ostream* warn = &std::cerr) {
  const auto dir = beam_data_dir(path);
  for (const char* f : {"A.mtx", "B.mtx", "C.mtx"})
    if (!std::filesystem::exists(dir / f))
      throw Error("benchmarks", "beam data file " + (dir / f).string() + " not found",
                  "provide the SLICOT beam model as A.mtx, B.mtx, C.mtx (Matrix Market) in that directory "
                  "or set ICMOR_DATA_DIR");
  Matrix a = io::read_dense((dir / "A.mtx").string());
  Matrix b = io::read_dense((dir / "B.mtx").string());
  Matrix c = io::read_dense((dir / "C.mtx").string());
  if (c.cols() != a.rows() && c.rows() == a.rows() && c.cols() == 1) c.transposeInPlace();
  const Index n = a.rows();
  if (n != 349 && warn) *warn << "warning: beam model has " << n << " states (349 expected); proceeding\n";
  if (n < 101) throw Error("benchmarks", "beam model too small for the training matrix (needs >= 101 states)");
  BeamScenario s;
  s.X0 = Matrix::Zero(n, 2);
  s.X0(4, 0) = 1.0;
  s.X0(100, 1) = 100.0;
  s.which = which;
  Vector x0;
  if (which == BeamCase::trained) {
    s.v0 = Vector(2);
    s.v0 << 10.0, -1.0;
    x0 = s.X0 * s.v0;
    s.T = 1000.0;
    s.u = InputSignal::pulse(100.0, 200.0, Vector::Ones(b.cols()));
  } else {
    x0 = Vector::Constant(n, 5.0);
    s.T = 10000.0;
    s.u = InputSignal::none();
  }
  s.system = LtiSystem(StateMatrix(std::move(a)), std::move(b), std::move(c), std::move(x0));
  return s;
}

}  // namespace icmor
