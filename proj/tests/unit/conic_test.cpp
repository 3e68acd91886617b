#include "auxsig/conic.hpp"
#include "support/programs.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>

namespace auxsig::conic {
namespace {

using testing::kkt_violations;

ConicProgram lp_at_least_one() {
  ProgramBuilder b;
  const Index y = b.add_variables(1);
  b.set_objective(y, 1.0);
  b.add_nonnegative(AffineExpr::variable(y) - AffineExpr::constant_value(1.0));
  return b.build();
}

TEST(ConicSolve, OneDimensionalLp) {
  const ConicProgram p = lp_at_least_one();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal[0], 1.0, 1e-7);
  EXPECT_TRUE(kkt_violations(p, sol, 1e-8).empty());
}

TEST(ConicSolve, NormOfConstantVector) {
  ProgramBuilder b;
  const Index t = b.add_variables(1);
  b.set_objective(t, 1.0);
  b.add_cone({Cone::second_order(3),
              {AffineExpr::variable(t), AffineExpr::constant_value(3.0), AffineExpr::constant_value(4.0)}});
  const auto p = b.build();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal[0], 5.0, 1e-7);
  EXPECT_NEAR(sol.objective_value, sol.dual_objective_value, 1e-7);
}

TEST(ConicSolve, ContradictoryBoundsGiveCertificate) {
  ProgramBuilder b;
  const Index y = b.add_variables(1);
  b.add_nonnegative(AffineExpr::variable(y) - AffineExpr::constant_value(1.0));
  b.add_nonnegative(AffineExpr::variable(y, -1.0));
  const auto p = b.build();
  const auto sol = solve(p);
  EXPECT_TRUE(testing::certificate_violations(p, sol, 1e-8).empty());
}

TEST(ConicSolve, UnboundedGivesImprovingRay) {
  ProgramBuilder b;
  const Index y = b.add_variables(1);
  b.set_objective(y, -1.0);
  b.add_nonnegative(AffineExpr::variable(y));
  const auto p = b.build();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::DualInfeasible);
  EXPECT_NEAR(p.objective.dot(sol.primal), -1.0, 1e-9);
  EXPECT_GE(sol.primal[0], 0.0);
}

TEST(ConicSolve, EqualityConstrainedLp) {
  // min y0 + 2 y1  s.t. y0 + y1 = 1, y >= 0  ->  y = (1, 0)
  ProgramBuilder b;
  const Index y = b.add_variables(2);
  b.set_objective(y, 1.0);
  b.set_objective(y + 1, 2.0);
  b.add_equality(AffineExpr::variable(y) + AffineExpr::variable(y + 1) - AffineExpr::constant_value(1.0));
  b.add_nonnegative(AffineExpr::variable(y));
  b.add_nonnegative(AffineExpr::variable(y + 1));
  const auto sol = solve(b.build());
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.primal[1], 0.0, 1e-7);
}

TEST(ConicSolve, EmptyConeIsAllowed) {
  ConicProgram p;
  p.objective = Eigen::VectorXd::Zero(1);
  p.eq_lhs = Eigen::MatrixXd::Ones(1, 1);
  p.eq_rhs = Eigen::VectorXd::Constant(1, 2.0);
  p.cone_lhs = Eigen::MatrixXd::Zero(0, 1);
  p.cone_rhs = Eigen::VectorXd::Zero(0);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal[0], 2.0, 1e-8);
}

TEST(ConicSolve, MalformedProgramThrows) {
  ConicProgram p = lp_at_least_one();
  p.cone_rhs.resize(3);
  EXPECT_FALSE(check_program(p).empty());
  EXPECT_THROW((void)solve(p), std::invalid_argument);

  ConicProgram q = lp_at_least_one();
  q.cone_layout = {Cone::second_order(2)};
  EXPECT_FALSE(check_program(q).empty());
  EXPECT_TRUE(check_program(lp_at_least_one()).empty());
}

TEST(ConicSolve, RandomFeasibleProgramsMeetContract) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto planted = testing::random_feasible_program(rng);
    const auto sol = solve(planted.program, 1e-8);
    ASSERT_EQ(sol.status, SolveStatus::Optimal) << "trial " << trial;
    const auto issues = kkt_violations(planted.program, sol, 1e-8);
    EXPECT_TRUE(issues.empty()) << "trial " << trial << ": " << issues.front();
    EXPECT_LE(sol.objective_value, planted.program.objective.dot(planted.known_point) + 1e-8);
    // self-duality: primal and dual objectives agree
    EXPECT_NEAR(sol.objective_value, sol.dual_objective_value, 1e-8 * (1.0 + std::abs(sol.objective_value)));
  }
}

TEST(ConicSolve, PlantedCertificatesAreFound) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_infeasible_program(rng, trial % 2 == 0);
    const auto sol = solve(p, 1e-8);
    const auto issues = testing::certificate_violations(p, sol, 1e-8);
    EXPECT_TRUE(issues.empty()) << "trial " << trial << ": " << issues.front();
  }
}

TEST(ConicSolve, Deterministic) {
  std::mt19937_64 rng(13);
  const auto planted = testing::random_feasible_program(rng);
  const auto a = solve(planted.program);
  const auto b = solve(planted.program);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.primal, b.primal);
}

// --- hyperbolic rewrite --------------------------------------------------

std::vector<ConeRows> hyperbola(Index v_dim) {
  std::vector<Index> v(static_cast<std::size_t>(v_dim));
  for (Index i = 0; i < v_dim; ++i) v[static_cast<std::size_t>(i)] = 2 + i;
  return rewrite_hyperbolic(2 + v_dim, 0, 1, v);
}

bool rows_hold(const std::vector<ConeRows>& rows, const Eigen::VectorXd& y) {
  for (const auto& block : rows) {
    if (!satisfied(block, y)) return false;
  }
  return true;
}

TEST(RewriteHyperbolic, Examples) {
  const auto rows = hyperbola(2);
  EXPECT_TRUE(rows_hold(rows, (Eigen::VectorXd(4) << 1, 1, 2, 0).finished()));
  EXPECT_TRUE(rows_hold(rows, (Eigen::VectorXd(4) << 0, 5, 0, 0).finished()));
  EXPECT_FALSE(rows_hold(rows, (Eigen::VectorXd(4) << 1, 0, 1, 0).finished()));
}

TEST(RewriteHyperbolic, OutOfRangeIndexThrows) {
  const std::array<Index, 1> v{5};
  EXPECT_THROW((void)rewrite_hyperbolic(3, 0, 1, v), std::out_of_range);
  const std::array<Index, 1> ok{2};
  EXPECT_THROW((void)rewrite_hyperbolic(3, 3, 1, ok), std::out_of_range);
  EXPECT_THROW((void)rewrite_hyperbolic(3, 0, -1, ok), std::out_of_range);
}

TEST(RewriteHyperbolic, MatchesDirectEvaluation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto rows = hyperbola(3);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd y(5);
    for (Index j = 0; j < 5; ++j) y[j] = u(rng);
    const double margin = 4.0 * y[0] * y[1] - y.tail(3).squaredNorm();
    // skip draws within rounding of the boundary
    if (std::abs(margin) < 1e-9) continue;
    const bool direct = y[0] >= 0.0 && y[1] >= 0.0 && margin >= 0.0;
    EXPECT_EQ(rows_hold(rows, y), direct) << y.transpose();
    ++agree;
  }
  EXPECT_GT(agree, 990);
}

TEST(RewriteHyperbolic, MinimizingDeltaRecoversQuarterNorm) {
  // min delta s.t. 4 * 2 * delta >= ||(3, 4)||^2  ->  delta = 25 / 8
  ProgramBuilder b;
  const Index first = b.add_variables(4);
  b.set_objective(first + 1, 1.0);
  b.add_equality(AffineExpr::variable(first) - AffineExpr::constant_value(2.0));
  b.add_equality(AffineExpr::variable(first + 2) - AffineExpr::constant_value(3.0));
  b.add_equality(AffineExpr::variable(first + 3) - AffineExpr::constant_value(4.0));
  const std::array<Index, 2> v{first + 2, first + 3};
  b.add_cones(rewrite_hyperbolic(b.num_variables(), first, first + 1, v));
  const auto sol = solve(b.build());
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal[1], 25.0 / 8.0, 1e-7);
}

TEST(ProgramBuilder, MergesAdjacentOrthantRows) {
  ProgramBuilder b;
  const Index y = b.add_variables(2);
  b.add_nonnegative(AffineExpr::variable(y));
  b.add_nonnegative(AffineExpr::variable(y + 1));
  b.add_cone({Cone::second_order(2), {AffineExpr::variable(y), AffineExpr::variable(y + 1)}});
  b.add_nonnegative(AffineExpr::variable(y) + AffineExpr::constant_value(3.0));
  const auto p = b.build();
  ASSERT_EQ(p.cone_layout.size(), 3u);
  EXPECT_EQ(p.cone_layout[0].dim, 2);
  // s = h - G y reproduces the affine row
  EXPECT_DOUBLE_EQ(p.cone_rhs[4], 3.0);
  EXPECT_DOUBLE_EQ(p.cone_lhs(4, 0), -1.0);
}

TEST(AffineExpr, Arithmetic) {
  const AffineExpr e = 2.0 * AffineExpr::variable(0) - AffineExpr::variable(1, 3.0) +
                       AffineExpr::constant_value(1.5);
  const Eigen::Vector2d y(1.0, 2.0);
  EXPECT_DOUBLE_EQ(e.evaluate(y), 2.0 - 6.0 + 1.5);
}

// --- cone primitives -----------------------------------------------------

TEST(ConePrimitives, NtScalingMapsDualToPrimal) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = testing::random_layout(rng);
    const Eigen::VectorXd s = testing::random_interior(rng, layout);
    const Eigen::VectorXd z = testing::random_interior(rng, layout);
    const auto nt = detail::nt_scaling(layout, s, z);
    const double scale = 1.0 + testing::inf_norm(s) + testing::inf_norm(z);
    EXPECT_LE(testing::inf_norm(nt.w * z - nt.w_inv * s), 1e-10 * scale);
    EXPECT_LE(testing::inf_norm(nt.w * z - nt.lambda), 1e-10 * scale);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(s.size(), s.size());
    EXPECT_LE((nt.w * nt.w_inv - eye).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((nt.w - nt.w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ConePrimitives, JordanDivideInvertsProduct) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = testing::random_layout(rng);
    const Eigen::VectorXd u = testing::random_interior(rng, layout);
    const Eigen::VectorXd q = testing::gaussian(rng, u.size());
    const Eigen::VectorXd d = detail::jordan_product(layout, u, q);
    EXPECT_LE(testing::inf_norm(detail::jordan_divide(layout, u, d) - q), 1e-9 * (1.0 + testing::inf_norm(q)));
  }
}

TEST(ConePrimitives, MaxStepLandsOnBoundary) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const auto layout = testing::random_layout(rng);
    const Eigen::VectorXd u = testing::random_interior(rng, layout);
    const Eigen::VectorXd du = testing::gaussian(rng, u.size());
    const double t = detail::max_step(layout, u, du);
    if (std::isinf(t)) {
      EXPECT_GE(detail::interior_margin(layout, u + 1e6 * du), -1e-6);
      continue;
    }
    EXPECT_GT(t, 0.0);
    EXPECT_NEAR(detail::interior_margin(layout, u + t * du), 0.0, 1e-9 * (1.0 + t * testing::inf_norm(du)));
    EXPECT_GT(detail::interior_margin(layout, u + 0.99 * t * du), 0.0);
  }
}

TEST(ConePrimitives, InteriorMargin) {
  const std::vector<Cone> layout{Cone::orthant(2), Cone::second_order(3)};
  const Eigen::VectorXd u = (Eigen::VectorXd(5) << 1, 2, 5, 3, 4).finished();
  EXPECT_DOUBLE_EQ(detail::interior_margin(layout, u), 0.0);
  const Eigen::VectorXd v = (Eigen::VectorXd(5) << -1, 2, 6, 3, 4).finished();
  EXPECT_DOUBLE_EQ(detail::interior_margin(layout, v), -1.0);
}

}  // namespace
}  // namespace auxsig::conic
