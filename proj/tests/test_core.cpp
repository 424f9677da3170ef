#include <filesystem>

#include <gtest/gtest.h>

#include "icmor/icmor.hpp"
#include "support/oracles.hpp"

using namespace icmor;

TEST(IsHurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz(Matrix::Constant(1, 1, -1.0)));
  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  EXPECT_FALSE(is_hurwitz(rot));
  EXPECT_EQ(check_stability(rot).verdict, Stability::marginal);
  Matrix tri(2, 2);
  tri << -1, 100, 0, -2;
  EXPECT_TRUE(is_hurwitz(tri));
  Matrix up(1, 1);
  up << 0.5;
  EXPECT_EQ(check_stability(up).verdict, Stability::unstable);
}

TEST(IsHurwitz, RejectsNonSquare) { EXPECT_THROW(is_hurwitz(Matrix::Zero(2, 3)), std::invalid_argument); }

TEST(LtiSystem, DimensionChecks) {
  EXPECT_THROW(LtiSystem(Matrix(Matrix::Identity(2, 2)), Matrix::Zero(3, 1), Matrix::Zero(1, 2), Vector::Zero(2)),
               std::invalid_argument);
  EXPECT_THROW(LtiSystem(Matrix(Matrix::Identity(2, 2)), Matrix::Zero(2, 1), Matrix::Zero(1, 3), Vector::Zero(2)),
               std::invalid_argument);
  EXPECT_THROW(LtiSystem(Matrix(Matrix::Identity(2, 2)), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Vector::Zero(1)),
               std::invalid_argument);
  LtiSystem ok(Matrix(-Matrix::Identity(2, 2)), Matrix(2, 0), Matrix::Zero(1, 2), Vector::Zero(2));
  EXPECT_EQ(ok.q(), 0);
}

TEST(Project, IdentityReproducesSystem) {
  test::Rng rng(1);
  const LtiSystem sys = test::random_stable_system(rng, 7, 2, 3);
  const Matrix id = Matrix::Identity(7, 7);
  const ReducedModel rom = project(sys, id, id);
  EXPECT_LE((rom.Ar - sys.A().dense()).norm(), 1e-14 * sys.A().dense().norm());
  EXPECT_LE((rom.Br - sys.B()).norm(), 1e-14 * sys.B().norm());
  EXPECT_LE((rom.Cr - sys.C()).norm(), 1e-14 * sys.C().norm());
  EXPECT_LE((rom.x0r - sys.x0()).norm(), 1e-14 * sys.x0().norm());
  EXPECT_LE(rom.biorthogonality_error(), 1e-14);
}

TEST(Project, Scalar) {
  LtiSystem sys(Matrix::Constant(1, 1, -2.0), Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 4.0),
                Vector::Constant(1, 5.0));
  const ReducedModel rom = project(sys, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  EXPECT_EQ(rom.Ar(0, 0), -2.0);
  EXPECT_EQ(rom.Br(0, 0), 3.0);
  EXPECT_EQ(rom.Cr(0, 0), 4.0);
  EXPECT_EQ(rom.x0r(0), 5.0);
}

TEST(Project, RankDeficientBasesRejected) {
  test::Rng rng(2);
  const LtiSystem sys = test::random_stable_system(rng, 5, 1, 1);
  Matrix v = Matrix::Zero(5, 2);
  v(0, 0) = 1;
  v(1, 1) = 1;
  Matrix w = Matrix::Zero(5, 2);
  w(2, 0) = 1;
  w(0, 1) = 1;
  try {
    project(sys, v, w);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bases not bi-orthogonalizable"), std::string::npos);
  }
}

TEST(Project, Rebiorthogonalizes) {
  test::Rng rng(3);
  const LtiSystem sys = test::random_stable_system(rng, 8, 1, 1);
  const Matrix v = test::gaussian(rng, 8, 3);
  const Matrix w = test::gaussian(rng, 8, 3);
  const ReducedModel rom = project(sys, v, w);
  EXPECT_LE(rom.biorthogonality_error(), 1e-10);
  EXPECT_THROW(project(sys, v, w, BiorthogonalityPolicy::reject), Error);
}

TEST(SplitSystem, Parts) {
  test::Rng rng(4);
  const LtiSystem sys = test::random_stable_system(rng, 6, 2, 2);
  auto [unc, con] = split_system(sys);
  EXPECT_EQ(unc.B().norm(), 0.0);
  EXPECT_EQ(unc.x0(), sys.x0());
  EXPECT_EQ(con.x0().norm(), 0.0);
  EXPECT_EQ(con.B(), sys.B());
}

TEST(SplitSystem, ScalarClosedForm) {
  // y(t) = e^{-t} + (1 - e^{-t}) = 1 for a = -1, b = c = x0 = 1, u = 1
  LtiSystem sys(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Ones(1));
  auto [unc, con] = split_system(sys);
  const TimeMesh mesh = make_log_mesh(10.0, 200);
  const InputSignal u = InputSignal::function(1, [](double) { return Vector::Ones(1); });
  const Trajectory y = integrate_lti(sys, u, mesh);
  const Trajectory yu = integrate_lti(unc, u, mesh);
  const Trajectory yc = integrate_lti(con, u, mesh);
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const double t = mesh.points[k];
    EXPECT_NEAR(yu.y(0, k), std::exp(-t), 1e-9);
    EXPECT_NEAR(yc.y(0, k), 1.0 - std::exp(-t), 1e-9);
    EXPECT_NEAR(y.y(0, k), 1.0, 1e-9);
  }
}

TEST(SplitSystem, ZeroPartsGiveZeroOutput) {
  test::Rng rng(5);
  LtiSystem sys = test::random_stable_system(rng, 5, 1, 1).with_x0(Vector::Zero(5));
  const TimeMesh mesh = make_log_mesh(5.0, 100);
  const InputSignal u = InputSignal::function(1, [](double t) { return Vector::Constant(1, std::sin(t)); });
  auto [unc, con] = split_system(sys);
  EXPECT_EQ(integrate_lti(unc, u, mesh).y.norm(), 0.0);
  LtiSystem nob = test::random_stable_system(rng, 5, 1, 1).with_B(Matrix::Zero(5, 1));
  auto [unc2, con2] = split_system(nob);
  EXPECT_EQ(integrate_lti(con2, u, mesh).y.norm(), 0.0);
}

// Superposition: y = y_x0 + y_u on random systems and inputs.
TEST(SplitSystem, SuperpositionProperty) {
  test::Rng rng(6);
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 19);
    const Index q = 1 + static_cast<Index>(rng() % 3);
    const LtiSystem sys = test::random_stable_system(rng, n, 2, q);
    const Vector w = test::gaussian_vector(rng, q);
    const Vector ph = test::gaussian_vector(rng, q);
    const InputSignal u = InputSignal::function(q, [w, ph](double t) {
      return Vector((w.array() * (t + ph.array()).sin()).matrix());
    });
    const TimeMesh mesh = make_uniform_mesh(5.0, 500);
    auto [unc, con] = split_system(sys);
    const Trajectory y = integrate_lti(sys, u, mesh, opt);
    const Trajectory y1 = integrate_lti(unc, u, mesh, opt);
    const Trajectory y2 = integrate_lti(con, u, mesh, opt);
    Trajectory sum = y1;
    sum.y += y2.y;
    const double gap = cumulative_l2_error(y, sum).tail(1)(0);
    const double scale = cumulative_l2_norm(y).tail(1)(0);
    EXPECT_LE(gap, 10 * opt.rtol * std::max(1.0, scale)) << "trial " << trial;
  }
}

TEST(StabilityCheck, SparseEstimate) {
  ConvDiffConfig cfg;
  cfg.n_inner = 50;
  const auto prob = convdiff_generate(cfg);
  const StabilityCheck st = check_stability(prob.system.A(), 100);
  EXPECT_EQ(st.verdict, Stability::stable);
}

TEST(MatrixMarket, RoundTrip) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "icmor_test_mm";
  fs::create_directories(dir);
  test::Rng rng(7);
  const Matrix m = test::gaussian(rng, 4, 3);
  io::write_dense(dir / "m.mtx", m);
  EXPECT_EQ(io::read_dense(dir / "m.mtx"), m);
  SparseMatrix s = m.sparseView();
  io::write_sparse(dir / "s.mtx", s);
  EXPECT_EQ(Matrix(io::read_sparse(dir / "s.mtx")), m);
  EXPECT_TRUE(io::is_coordinate_file(dir / "s.mtx"));
  EXPECT_FALSE(io::is_coordinate_file(dir / "m.mtx"));
  EXPECT_THROW(io::read_dense(dir / "missing.mtx"), Error);
}

TEST(SystemIo, ManifestRoundTrip) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "icmor_test_sys";
  fs::remove_all(dir);
  test::Rng rng(8);
  const LtiSystem sys = test::random_stable_system(rng, 6, 2, 1);
  const fs::path manifest = io::save_system(dir, sys, "demo");
  const LtiSystem back = io::load_system(manifest);
  EXPECT_EQ(back.A().to_dense(), sys.A().to_dense());
  EXPECT_EQ(back.B(), sys.B());
  EXPECT_EQ(back.C(), sys.C());
  EXPECT_EQ(back.x0(), sys.x0());
}
