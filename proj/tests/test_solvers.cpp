#include <gtest/gtest.h>

#include "icmor/icmor.hpp"
#include "support/oracles.hpp"

using namespace icmor;

namespace {

double spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SparseMatrix diffusion_1d(Index n) {
  const double h = 1.0 / static_cast<double>(n + 1);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, -2.0 / (h * h));
    if (i > 0) t.emplace_back(i, i - 1, 1.0 / (h * h));
    if (i + 1 < n) t.emplace_back(i, i + 1, 1.0 / (h * h));
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace

TEST(LyapunovDense, Examples) {
  const Matrix q = solvers::solve_lyapunov_dense(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), Side::observability);
  EXPECT_LE((q - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  const Matrix s = solvers::solve_lyapunov_dense(Matrix::Constant(1, 1, -3.0), Matrix::Constant(1, 1, 4.0),
                                                 Side::observability);
  EXPECT_NEAR(s(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(LyapunovDense, MatchesKroneckerOracle) {
  test::Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = test::random_stable_matrix(rng, 8);
    const Matrix c = test::gaussian(rng, 2, 8);
    const Matrix rhs = c.transpose() * c;
    const Matrix q = solvers::solve_lyapunov_dense(a, rhs, Side::observability);
    const Matrix ref = test::kron_lyapunov(a, rhs);
    EXPECT_LE((q - ref).norm(), 1e-9 * ref.norm());
    EXPECT_LE(solvers::lyapunov_residual(StateMatrix(a), q, rhs), 1e-10);
    EXPECT_LE((q - q.transpose()).norm(), 1e-12 * q.norm());
    // controllability orientation is the observability one for A^T
    const Matrix b = test::gaussian(rng, 8, 2);
    const Matrix p = solvers::solve_lyapunov_dense(a, b * b.transpose(), Side::controllability);
    const Matrix pref = test::kron_lyapunov(a.transpose(), b * b.transpose());
    EXPECT_LE((p - pref).norm(), 1e-9 * pref.norm());
    EXPECT_LE(solvers::lyapunov_residual(StateMatrix(a), p, b * b.transpose(), Side::controllability), 1e-10);
  }
}

TEST(LyapunovDense, PsdProperty) {
  test::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + static_cast<Index>(rng() % 28);
    const Matrix a = test::random_stable_matrix(rng, n);
    const Matrix c = test::gaussian(rng, 1 + static_cast<Index>(rng() % 3), n);
    const Matrix q = solvers::solve_lyapunov_dense(a, c.transpose() * c, Side::observability);
    Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues()(0), -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST(LyapunovDense, SingularOperator) {
  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  try {
    solvers::solve_lyapunov_dense(rot, Matrix::Identity(2, 2), Side::observability);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("singular Lyapunov operator"), std::string::npos);
  }
}

TEST(LyapunovResidual, Examples) {
  EXPECT_DOUBLE_EQ(solvers::lyapunov_residual(StateMatrix(Matrix(-Matrix::Identity(3, 3))), Matrix::Zero(3, 3),
                                              Matrix::Identity(3, 3)),
                   1.0);
}

TEST(LyapunovResidual, LowRankMatchesDense) {
  test::Rng rng(13);
  const Matrix a = test::random_stable_matrix(rng, 12);
  const Matrix c = test::gaussian(rng, 2, 12);
  const Matrix u = test::gaussian(rng, 4, 12);
  const double dense = solvers::lyapunov_residual(StateMatrix(a), u.transpose() * u, c.transpose() * c);
  const double low = solvers::lyapunov_residual_lowrank(StateMatrix(a), u, c);
  EXPECT_NEAR(low, dense, 1e-12 * dense);
  const Matrix b = test::gaussian(rng, 12, 2);
  const double dense_c = solvers::lyapunov_residual(StateMatrix(a), u.transpose() * u, b * b.transpose(),
                                                    Side::controllability);
  const double low_c = solvers::lyapunov_residual_lowrank(StateMatrix(a), u, b.transpose(), Side::controllability);
  EXPECT_NEAR(low_c, dense_c, 1e-12 * dense_c);
}

TEST(LyapunovLowRank, Diffusion1d) {
  const StateMatrix a(diffusion_1d(400));
  Matrix c = Matrix::Zero(1, 400);
  c(0, 100) = 1.0;
  c(0, 101) = 0.5;
  const auto r = solvers::solve_lyapunov_lowrank(a, c, Side::observability);
  EXPECT_TRUE(r.tolerance_reached);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LT(r.U.rows(), 100);
  const Matrix q = solvers::solve_lyapunov_dense(a.to_dense(), c.transpose() * c, Side::observability);
  EXPECT_LE(solvers::lyapunov_residual(a, q, c.transpose() * c), 1e-10);
}

TEST(LyapunovLowRank, ZeroRightHandSide) {
  const StateMatrix a(diffusion_1d(50));
  const auto r = solvers::solve_lyapunov_lowrank(a, Matrix::Zero(1, 50), Side::observability);
  EXPECT_EQ(r.U.rows(), 0);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(solvers::lyapunov_residual_lowrank(a, r.U, Matrix::Zero(1, 50)), 0.0);
}

TEST(LyapunovLowRank, ConvDiffMatchesDense) {
  ConvDiffConfig cfg;
  cfg.n_inner = 40;
  const auto prob = convdiff_generate(cfg);
  const LtiSystem& sys = prob.system;
  GramianOptions lr;
  lr.mode = GramianMode::low_rank;
  const GramianFactors low = observability_gramian(sys, lr);
  EXPECT_TRUE(low.tolerance_reached);
  EXPECT_LE(low.residual, 1e-10);
  GramianOptions dn;
  dn.mode = GramianMode::dense;
  const GramianFactors dense = observability_gramian(sys, dn);
  EXPECT_LE(dense.residual, 1e-10);
  const double qn = spectral_norm(*dense.X);
  const double gap = spectral_norm(*dense.X - low.U.transpose() * low.U);
  EXPECT_LE(gap, 1e-8 * qn) << "gap " << gap << " |Q| " << qn;
  // controllability side on the training matrix
  const GramianFactors plow = controllability_gramian(sys.A(), prob.X0, lr);
  EXPECT_LE(plow.residual, 1e-10);
}

TEST(Sylvester, Scalar) {
  const Matrix x = solvers::solve_sylvester_sparse_dense(StateMatrix(Matrix::Constant(1, 1, -1.0)),
                                                         Matrix::Constant(1, 1, -2.0), Matrix::Constant(1, 1, 12.0));
  EXPECT_NEAR(x(0, 0), -4.0, 1e-14);
}

TEST(Sylvester, SignFlipIdentity) {
  test::Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = test::random_stable_matrix(rng, 15);
    const Matrix c = test::gaussian(rng, 2, 15);
    const Matrix q = solvers::solve_lyapunov_dense(a, c.transpose() * c, Side::observability);
    const Matrix qbar = solvers::solve_sylvester_sparse_dense(StateMatrix(a), a, c.transpose() * c);
    EXPECT_LE((qbar + q).norm(), 1e-9 * q.norm());
  }
}

TEST(Sylvester, ResidualAndOracle) {
  test::Rng rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = test::random_stable_matrix(rng, 50);
    const Matrix ar = test::random_stable_matrix(rng, 5);
    const Matrix rhs = test::gaussian(rng, 50, 5);
    const Matrix x = solvers::solve_sylvester_sparse_dense(StateMatrix(a), ar, rhs);
    EXPECT_LE(solvers::sylvester_residual(StateMatrix(a), ar, x, rhs), 1e-10);
    const Matrix ref = test::kron_sylvester(a, ar, rhs);
    EXPECT_LE((x - ref).norm(), 1e-9 * ref.norm());
    // sparse storage takes the same path
    const Matrix xs = solvers::solve_sylvester_sparse_dense(StateMatrix(SparseMatrix(a.sparseView())), ar, rhs);
    EXPECT_LE((xs - x).norm(), 1e-10 * x.norm());
  }
}

TEST(Sylvester, SpectraNotSeparated) {
  try {
    solvers::solve_sylvester_sparse_dense(StateMatrix(Matrix::Constant(1, 1, -1.0)), Matrix::Constant(1, 1, 1.0),
                                          Matrix::Ones(1, 1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("spectra not separated"), std::string::npos);
  }
}

TEST(Gramian, DenseKindsAndFactor) {
  test::Rng rng(16);
  const LtiSystem sys = test::random_stable_system(rng, 10, 2, 1);
  const GramianFactors q = observability_gramian(sys);
  EXPECT_EQ(q.kind, GramianKind::cholesky_of_dense);
  ASSERT_TRUE(q.X.has_value());
  EXPECT_LE((q.U.transpose() * q.U - *q.X).norm(), 1e-12 * q.X->norm());
  EXPECT_GE(q.min_eigenvalue, -1e-10 * spectral_norm(*q.X));
}

// Energy identity: ||y||^2 = x0^T Q x0 for the uncontrolled output.
TEST(Gramian, EnergyIdentity) {
  test::Rng rng(17);
  IntegratorOptions opt;
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 29);
    const LtiSystem sys = test::random_stable_system(rng, n, 2, 0);
    const GramianFactors q = observability_gramian(sys);
    const double energy = sys.x0().dot(*q.X * sys.x0());
    const double T = decay_horizon(sys, 1e-9);
    const TimeMesh mesh = refine_mesh(make_log_mesh(T, 10000), 10);
    const Trajectory y = integrate_lti(sys, InputSignal::none(), mesh, opt);
    const double e = cumulative_l2_norm(y).tail(1)(0);
    EXPECT_LE(std::abs(e * e - energy), 1e-6 * energy) << "trial " << trial << " N " << n;
  }
}
