#include <gtest/gtest.h>

#include <cmath>

#include "psfem/scenarios.hpp"
#include "psfem/solver.hpp"
#include "test_util.hpp"

using namespace psfem;
using testutil::uniform;

namespace {

SparseMatrix to_sparse(const Eigen::MatrixXd& d) {
  SparseMatrix s = d.sparseView();
  s.makeCompressed();
  return s;
}

TEST(LinearSolve, IdentityReturnsRhs) {
  SparseMatrix I(7, 7);
  I.setIdentity();
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(7, -3.0, 3.0);
  for (auto kind : {LinearSolverKind::Auto, LinearSolverKind::Cholesky, LinearSolverKind::LU})
    EXPECT_LT((linear_solve(I, b, kind) - b).norm(), 1e-15);
}

TEST(LinearSolve, RandomSpdMatchesDenseFactorization) {
  const int n = 50;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = (std::abs(i - j) <= 3) ? uniform(-1.0, 1.0) : 0.0;
  A = A * A.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = uniform(-1.0, 1.0);
  const Eigen::VectorXd ref = A.ldlt().solve(b);
  for (auto kind : {LinearSolverKind::Auto, LinearSolverKind::LU}) {
    LinearSolveInfo info;
    const auto x = linear_solve(to_sparse(A), b, kind, &info);
    EXPECT_LT((x - ref).norm(), 1e-10 * ref.norm());
    EXPECT_LE(info.relative_residual, 1e-10);
    EXPECT_EQ(info.used_cholesky, kind == LinearSolverKind::Auto);
  }
}

TEST(LinearSolve, SaddlePointWithKnownSolution) {
  // [A B^T; B 0] [x; y] = [f; g] with x, y chosen first
  Eigen::MatrixXd A(3, 3), B(2, 3);
  A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  B << 1, 0, 1, 0, 1, -1;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(5, 5);
  K.topLeftCorner(3, 3) = A;
  K.topRightCorner(3, 2) = B.transpose();
  K.bottomLeftCorner(2, 3) = B;
  Eigen::VectorXd sol(5);
  sol << 1.0, -2.0, 0.5, 3.0, -1.5;
  const Eigen::VectorXd rhs = K * sol;
  const auto x = linear_solve(to_sparse(K), rhs, LinearSolverKind::LU);
  EXPECT_LT((x - sol).norm(), 1e-13);
  // indefinite: the Cholesky-first path falls back to LU
  LinearSolveInfo info;
  const auto y = linear_solve(to_sparse(K), rhs, LinearSolverKind::Auto, &info);
  EXPECT_FALSE(info.used_cholesky);
  EXPECT_LT((y - sol).norm(), 1e-13);
  EXPECT_THROW(linear_solve(to_sparse(K), rhs, LinearSolverKind::Cholesky), Error);
}

TEST(LinearSolve, SingularMatrixIsReported) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
  try {
    linear_solve(to_sparse(A), b, LinearSolverKind::LU);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularSystem);
  }
  EXPECT_THROW(linear_solve(to_sparse(A), Eigen::VectorXd::Ones(2)), Error);
}

TEST(FittedOrder, RecoversKnownOrders) {
  EXPECT_NEAR(fitted_order({1e-1, 1e-2, 1e-4}), 2.0, 1e-12);
  EXPECT_NEAR(fitted_order({1.0, 0.5, 0.25}), 1.0, 1e-12);
  EXPECT_TRUE(std::isnan(fitted_order({1.0, 0.1})));
}

CookParams small_cook(Regime r = Regime::PlaneStress) {
  CookParams c;
  c.n = 4;
  c.order = 2;
  c.regime = r;
  return c;
}

double tip_u2(const Scenario<2>& sc, const Eigen::VectorXd& q) {
  double s = 0.0;
  for (int n : sc.probes[0].nodes) s += q(2 * n + 1);
  return s / sc.probes[0].nodes.size();
}

TEST(Run, ZeroLoadConvergesImmediately) {
  auto c = small_cook();
  c.traction = 0.0;
  const auto sc = cook<2>(c);
  System<2> sys(sc.problem);
  const auto res = run(sys, SolveSettings{});
  ASSERT_EQ(res.history.steps.size(), 10u);
  for (const auto& st : res.log.steps) EXPECT_EQ(st.residuals.size(), 1u);
  EXPECT_EQ(res.history.steps.back().q.norm(), 0.0);
}

TEST(Run, LoadStepInvariance) {
  for (auto regime : {Regime::PlaneStress, Regime::PlaneStrain}) {
    const auto sc = cook<2>(small_cook(regime));
    SolveSettings s10, s20;
    s20.n_load_steps = 20;
    System<2> a(sc.problem), b(sc.problem);
    const double u10 = tip_u2(sc, run(a, s10).history.steps.back().q);
    const double u20 = tip_u2(sc, run(b, s20).history.steps.back().q);
    EXPECT_LT(std::abs(u10 - u20), 1e-8 * std::abs(u10)) << to_string(regime);
  }
}

TEST(Run, ResidualsDecreaseAndEquilibriumHolds) {
  const auto sc = cook<2>(small_cook());
  System<2> sys(sc.problem);
  int calls = 0;
  const auto res = run(sys, SolveSettings{}, [&](const StepSnapshot&) { ++calls; });
  EXPECT_EQ(calls, 10);
  for (const auto& st : res.log.steps) {
    const auto& r = st.residuals;
    ASSERT_GE(r.size(), 3u);
    // the final descent into the round-off level is monotone
    const size_t n = st.stagnated ? r.size() - 1 : r.size();
    EXPECT_LT(r[n - 1], r[n - 2]);
    EXPECT_LT(r[n - 2], r[n - 3]);
    EXPECT_LE(st.max_S33_over_mu, 1e-10);
  }
  // internal and external virtual work agree for arbitrary admissible variations
  Eigen::VectorXd r;
  const auto& q = res.history.steps.back().q;
  sys.assemble(q, 1.0, r, nullptr);
  const auto& fext = sys.external_load();
  for (int t = 0; t < 5; ++t) {
    double wr = 0.0, wf = 0.0;
    for (int d : sys.free_dofs()) {
      const double v = uniform(-1.0, 1.0);
      wr += r(d) * v;
      wf += std::abs(fext(d) * v);
    }
    EXPECT_LT(std::abs(wr), 1e-8 * wf);
  }
}

TEST(Run, ThreeFieldConverges) {
  auto c = small_cook(Regime::PlaneStrain);
  c.n = 2;
  const auto sc = cook<2>(c);
  ASSERT_EQ(sc.problem.formulation, Formulation::ThreeField);
  System<2> sys(sc.problem);
  const auto res = run(sys, SolveSettings{});
  EXPECT_NEAR(tip_u2(sc, res.history.steps.back().q), 18.29, 0.005 * 18.29);
}

TEST(Run, ExhaustedIterationsRaiseNewtonDiverged) {
  const auto sc = cook<2>(small_cook());
  System<2> sys(sc.problem);
  SolveSettings s;
  s.max_newton_iters = 1;
  try {
    run(sys, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NewtonDiverged);
  }
}

TEST(Run, InvalidSettingsRejected) {
  const auto sc = cook<2>(small_cook());
  System<2> sys(sc.problem);
  SolveSettings s;
  s.n_load_steps = 0;
  EXPECT_THROW(run(sys, s), Error);
  s = {};
  s.newton_rel_tol = 0.0;
  EXPECT_THROW(run(sys, s), Error);
}

}  // namespace
