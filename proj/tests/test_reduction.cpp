#include <gtest/gtest.h>

#include "icmor/icmor.hpp"
#include "support/oracles.hpp"

using namespace icmor;

namespace {

LtiSystem diag_example() {
  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  return LtiSystem(a, Matrix::Ones(2, 1), Matrix::Ones(1, 2), Vector::Zero(2));
}

Matrix similarity(test::Rng& rng, Index n) {
  while (true) {
    const Matrix t = Matrix::Identity(n, n) + 0.3 * test::gaussian(rng, n, n);
    Eigen::JacobiSVD<Matrix> svd(t);
    const Vector s = svd.singularValues();
    if (s(0) / s(n - 1) <= 1e3) return t;
  }
}

}  // namespace

TEST(HankelValues, IdentityGramians) {
  GramianFactors p, q;
  p.side = Side::controllability;
  p.U = Matrix::Identity(4, 4);
  q.U = Matrix::Identity(4, 4);
  const Vector s = hankel_singular_values(p, q);
  EXPECT_LE((s - Vector::Ones(4)).norm(), 1e-15);
}

TEST(HankelValues, DiagonalExampleClosedForm) {
  const LtiSystem sys = diag_example();
  const GramianFactors p = controllability_gramian(sys.A(), sys.B());
  const GramianFactors q = observability_gramian(sys);
  Matrix ref(2, 2);
  ref << 0.5, 1.0 / 3, 1.0 / 3, 0.25;
  EXPECT_LE((*p.X - ref).norm(), 1e-14);
  EXPECT_LE((*q.X - ref).norm(), 1e-14);
  Eigen::EigenSolver<Matrix> es(ref * ref, false);
  Vector ev = es.eigenvalues().real().cwiseSqrt();
  std::sort(ev.data(), ev.data() + 2, std::greater<>());
  const Vector s = hankel_singular_values(p, q);
  EXPECT_LE((s - ev).norm(), 1e-12);
  auto [rom, rep] = balanced_truncation(sys, 1, p, q);
  EXPECT_NEAR(rep.alpha, 2 * ev(1), 1e-12);
}

TEST(HankelValues, InvariantUnderStateTransformation) {
  test::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const LtiSystem sys = test::random_stable_system(rng, 12, 2, 2);
    const Matrix t = similarity(rng, 12);
    const Matrix ti = t.inverse();
    const LtiSystem tr(Matrix(ti * sys.A().dense() * t), ti * sys.B(), sys.C() * t, ti * sys.x0());
    const Vector s1 = hankel_singular_values(controllability_gramian(sys.A(), sys.B()), observability_gramian(sys));
    const Vector s2 = hankel_singular_values(controllability_gramian(tr.A(), tr.B()), observability_gramian(tr));
    const Index k = std::min(s1.size(), s2.size());
    for (Index i = 0; i < k; ++i)
      if (s1(i) > 1e-6 * s1(0)) EXPECT_NEAR(s2(i), s1(i), 1e-8 * s1(i)) << i;
  }
}

TEST(BalancedTruncation, ScalarIsExact) {
  LtiSystem sys(Matrix::Constant(1, 1, -2.0), Matrix::Constant(1, 1, 1.5), Matrix::Constant(1, 1, 0.7),
                Vector::Constant(1, 1.0));
  auto [rom, rep] = balanced_truncation(sys, 1);
  EXPECT_NEAR(rom.Ar(0, 0), -2.0, 1e-14);
  EXPECT_NEAR(rom.Cr(0, 0) * rom.Br(0, 0), 1.5 * 0.7, 1e-14);
  EXPECT_EQ(rep.alpha, 0.0);
}

TEST(BalancedTruncation, TiesAndRankErrors) {
  Matrix a = -Matrix::Identity(2, 2);
  LtiSystem sys(a, Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2));
  try {
    balanced_truncation(sys, 1);
    FAIL() << "expected a tie error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ambiguous truncation order"), std::string::npos);
    EXPECT_NE(e.hint().find("n = 2"), std::string::npos);
  }
  LtiSystem thin(a, Matrix::Constant(2, 1, 1.0), Matrix::Constant(1, 2, 1.0), Vector::Zero(2));
  EXPECT_THROW(balanced_truncation(thin, 2), Error);
}

TEST(BalancedTruncation, RandomSystemsInvariants) {
  test::Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 6 + static_cast<Index>(rng() % 30);
    const LtiSystem sys = test::random_stable_system(rng, n, 1 + trial % 3, 1 + trial % 2);
    const Index r = 1 + static_cast<Index>(rng() % 5);
    auto [rom, rep] = balanced_truncation(sys, r);
    EXPECT_TRUE(is_hurwitz(rom.Ar)) << "trial " << trial;
    EXPECT_LE(rom.biorthogonality_error(), 1e-10);
    EXPECT_LE((rom.x0r - rom.W->transpose() * sys.x0()).norm(), 1e-12 * (1 + rom.x0r.norm()));
    for (Index i = 1; i < rep.hankel_values.size(); ++i) EXPECT_LE(rep.hankel_values(i), rep.hankel_values(i - 1));
    EXPECT_GE(rep.hankel_values.minCoeff(), 0.0);
    EXPECT_GE(rep.alpha, 0.0);
  }
}

TEST(BalancedTruncation, ProjectRandomBasesExample) {
  test::Rng rng(23);
  const LtiSystem sys = test::random_stable_system(rng, 10, 2, 2);
  auto [rom, rep] = balanced_truncation(sys, 4);
  const ReducedModel again = project(sys, *rom.V, *rom.W);
  EXPECT_LE((again.Ar - rom.Ar).norm(), 1e-12 * rom.Ar.norm());
  EXPECT_TRUE(is_hurwitz(again.Ar));
}

TEST(BalancedTruncation, ErrorBoundOnSimulation) {
  test::Rng rng(24);
  IntegratorOptions opt;
  for (int trial = 0; trial < 10; ++trial) {
    const LtiSystem sys = test::random_stable_system(rng, 40, 2, 2, false);
    auto [rom, rep] = balanced_truncation(sys, 10);
    const Vector f = Vector::NullaryExpr(2, [&](Index) { return test::uniform(rng, 0.5, 4.0); });
    const Vector amp = test::gaussian_vector(rng, 2);
    const double T = 20.0;
    const InputSignal u = InputSignal::function(2, [f, amp, T](double t) {
      return Vector(t < T ? Vector((amp.array() * (f.array() * t).sin()).matrix()) : Vector(Vector::Zero(2)));
    });
    const TimeMesh mesh = make_uniform_mesh(T, 20000);
    const Trajectory y = integrate_lti(sys, u, mesh, opt);
    const Trajectory yr = integrate_lti(rom, u, mesh, opt);
    const double err = cumulative_l2_error(y, yr).tail(1)(0);
    const TimeMesh umesh = mesh;
    Vector usq(static_cast<Index>(umesh.size()));
    for (std::size_t k = 0; k < umesh.size(); ++k) usq(static_cast<Index>(k)) = u(umesh.points[k]).squaredNorm();
    const double unorm = cumulative_sqrt_integral(umesh.points, usq).tail(1)(0);
    EXPECT_LE(err, rep.alpha * unorm + 10 * opt.rtol) << "trial " << trial;
  }
}

TEST(BtAug, EmptyTrainingEqualsBt) {
  test::Rng rng(25);
  const LtiSystem sys = test::random_stable_system(rng, 15, 2, 2);
  auto [a, ra] = bt_aug(sys, Matrix(15, 0), 5);
  auto [b, rb] = balanced_truncation(sys, 5);
  EXPECT_LE((*a.V - *b.V).norm(), 1e-12 * b.V->norm());
  EXPECT_LE((*a.W - *b.W).norm(), 1e-12 * b.W->norm());
  EXPECT_EQ(ra.method, Method::BT_aug);
  ASSERT_TRUE(ra.aug_alpha.has_value());
  EXPECT_NEAR(*ra.aug_alpha, rb.alpha, 1e-12 * (1 + rb.alpha));
}

TEST(BtAug, UncontrolledEqualsSplitBt) {
  test::Rng rng(26);
  LtiSystem sys = test::random_stable_system(rng, 20, 2, 1);
  sys = sys.with_B(Matrix::Zero(20, 1));
  const Matrix x0t = test::gaussian(rng, 20, 3);
  sys = sys.with_x0(x0t * test::gaussian_vector(rng, 3));
  auto [aug, ra] = bt_aug(sys, x0t, 6);
  auto [split, rs] = split_reduce(sys, x0t, 6, 6, UncontrolledMethod::BT);
  EXPECT_EQ(split.controlled.order(), 0);
  const TimeMesh mesh = make_log_mesh(20.0, 2000);
  const Trajectory ya = integrate_lti(aug, InputSignal::none(), mesh);
  const Trajectory ys = integrate_lti(split, InputSignal::none(), mesh);
  EXPECT_LE((ya.y - ys.y).norm(), 1e-8 * ya.y.norm());
}

TEST(SplitReduce, ZeroInputIsBtOfUncontrolledSystem) {
  test::Rng rng(27);
  LtiSystem sys = test::random_stable_system(rng, 12, 1, 1).with_B(Matrix::Zero(12, 1));
  const Matrix x0t = test::gaussian(rng, 12, 2);
  auto [split, rep] = split_reduce(sys, x0t, 3, 3, UncontrolledMethod::BT);
  EXPECT_EQ(split.controlled.order(), 0);
  const LtiSystem aux(sys.A(), x0t, sys.C(), sys.x0());
  auto [bt, rb] = balanced_truncation(aux, 3);
  EXPECT_LE((split.uncontrolled.Ar - bt.Ar).norm(), 1e-12 * bt.Ar.norm());
  EXPECT_EQ(split.uncontrolled.Br.norm(), 0.0);
}

TEST(SplitReduce, IsrkBothPartsStable) {
  test::Rng rng(28);
  for (int trial = 0; trial < 5; ++trial) {
    const LtiSystem sys = test::random_stable_system(rng, 30, 2, 1);
    const Matrix x0t = test::gaussian(rng, 30, 2);
    auto [split, rep] = split_reduce(sys, x0t, 4, 4, UncontrolledMethod::ISRK);
    EXPECT_TRUE(is_hurwitz(split.uncontrolled.Ar));
    EXPECT_TRUE(is_hurwitz(split.controlled.Ar));
    EXPECT_LE(split.uncontrolled.biorthogonality_error(), 1e-10);
    EXPECT_LE(split.controlled.biorthogonality_error(), 1e-10);
    EXPECT_EQ(split.controlled.x0r.norm(), 0.0);
    EXPECT_EQ(split.uncontrolled.Br.norm(), 0.0);
    EXPECT_LE(rep.constraint_residual_max, 1e-10);
  }
}

TEST(Irka, ScalarExact) {
  LtiSystem sys(Matrix::Constant(1, 1, -3.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Zero(1));
  auto [rom, rep] = irka(sys, 1);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_NEAR(rom.Ar(0, 0), -3.0, 1e-13);
  EXPECT_NEAR(rom.Cr(0, 0) * rom.Br(0, 0), 1.0, 1e-13);
}

TEST(Irka, FixedPointMirrorsPoles) {
  InterpolationOptions opt;
  opt.tol = 1e-12;
  auto [rom, rep] = irka(diag_example(), 1, opt);
  EXPECT_TRUE(rep.converged);
  ASSERT_EQ(rep.final_shifts.size(), 1u);
  EXPECT_NEAR(rep.final_shifts[0].real(), -rom.Ar(0, 0), 1e-8);
}

TEST(Irka, RandomMimo) {
  test::Rng rng(29);
  const LtiSystem sys = test::random_stable_system(rng, 30, 2, 2);
  auto [rom, rep] = irka(sys, 6);
  EXPECT_LE(rom.biorthogonality_error(), 1e-10);
  EXPECT_EQ(rom.order(), 6);
  if (rep.converged) {
    Eigen::EigenSolver<Matrix> es(rom.Ar, false);
    std::vector<Complex> mirrored;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) mirrored.push_back(-es.eigenvalues()(i));
    EXPECT_LE(detail::shift_change(mirrored, rep.final_shifts), 1e-5);
  }
}

TEST(Isrk, ScalarExact) {
  LtiSystem sys(Matrix::Constant(1, 1, -3.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Zero(1));
  const GramianFactors q = observability_gramian(sys);
  auto [rom, rep] = isrk(sys, 1, q);
  EXPECT_NEAR(rom.Ar(0, 0), -3.0, 1e-13);
  EXPECT_NEAR(rom.Cr(0, 0) * rom.Br(0, 0), 1.0, 1e-13);
}

TEST(Isrk, ConstraintAndStability) {
  test::Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const LtiSystem sys = test::random_stable_system(rng, 30, 2, 1 + trial % 2);
    const GramianFactors q = observability_gramian(sys);
    auto [rom, rep] = isrk(sys, 5, q);
    const Matrix& v = *rom.V;
    const Matrix& w = *rom.W;
    const Matrix qv = *q.X * v;
    const Matrix ref = qv * (v.transpose() * qv).inverse();
    EXPECT_LE((w - ref).norm(), 1e-10 * w.norm()) << "trial " << trial;
    EXPECT_LE(rep.constraint_residual_max, 1e-10);
    EXPECT_TRUE(is_hurwitz(rom.Ar)) << "trial " << trial;
    EXPECT_LE(rom.biorthogonality_error(), 1e-10);
  }
}

TEST(Isrk, OrderAboveGramianRankFails) {
  // Q has rank 1 (single observable mode), so V^T Q V is singular for n = 2.
  Matrix a(3, 3);
  a << -1, 0, 0, 0, -2, 0, 0, 0, -3;
  Matrix c = Matrix::Zero(1, 3);
  c(0, 0) = 1;
  LtiSystem sys(a, Matrix::Ones(3, 1), c, Vector::Zero(3));
  const GramianFactors q = observability_gramian(sys);
  EXPECT_THROW(isrk(sys, 2, q), Error);
}

TEST(Isrk, ZeroOutputRejectedUpFront) {
  const LtiSystem sys(Matrix(Vector::LinSpaced(4, -4, -1).asDiagonal()), Matrix::Ones(4, 1), Matrix::Zero(2, 4),
                      Vector::Zero(4));
  const GramianFactors q = observability_gramian(sys);
  try {
    isrk(sys, 1, q);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("rank 0"), std::string::npos) << e.what();
  }
}

TEST(Report, Json) {
  auto [rom, rep] = balanced_truncation(diag_example(), 1);
  const auto j = to_json(rep);
  EXPECT_EQ(j["method"], "BT");
  EXPECT_EQ(j["hankel_values"].size(), 2u);
  EXPECT_EQ(method_from_string("split-ISRK"), Method::split_ISRK);
  EXPECT_THROW(method_from_string("nope"), Error);
}
