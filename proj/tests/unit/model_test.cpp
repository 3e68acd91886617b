#include "auxsig/model.hpp"
#include "auxsig/sigma.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace auxsig {
namespace {

using testing::scalar_pair;

TEST(Validate, ScalarPairIsClean) { EXPECT_TRUE(validate(scalar_pair()).empty()); }

TEST(Validate, RowMismatchBetweenModels) {
  DesignProblem p = scalar_pair();
  p.faulty.theta_map = Eigen::MatrixXd::Ones(2, 1);
  const auto report = validate(p);
  ASSERT_FALSE(report.empty());
  EXPECT_TRUE(has_violation(report, ViolationCode::RowMismatch));
}

TEST(Validate, AsymmetricCost) {
  DesignProblem p = scalar_pair();
  for (auto* m : {&p.normal, &p.faulty}) m->theta_map = Eigen::MatrixXd::Ones(1, 2);
  p.cost = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  EXPECT_TRUE(has_violation(validate(p), ViolationCode::CostAsymmetric));
}

TEST(Validate, IndefiniteCost) {
  DesignProblem p = scalar_pair();
  p.cost(0, 0) = -1.0;
  EXPECT_TRUE(has_violation(validate(p), ViolationCode::CostNotPsd));
}

TEST(Validate, OtherCodes) {
  {
    DesignProblem p = scalar_pair();
    p.normal.ineq_lhs = Eigen::MatrixXd::Ones(1, 1);
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::InequalityMismatch));
  }
  {
    DesignProblem p = scalar_pair();
    p.faulty.theta_map = Eigen::MatrixXd::Ones(1, 2);
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::SignalDimMismatch));
  }
  {
    DesignProblem p = scalar_pair();
    p.faulty.meas_map = Eigen::MatrixXd::Ones(1, 2);
    p.faulty.ineq_lhs = Eigen::MatrixXd::Zero(0, 2);
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::MeasDimMismatch));
  }
  {
    DesignProblem p = scalar_pair();
    p.normal.noise_map(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::NonFinite));
  }
  {
    DesignProblem p = scalar_pair();
    p.cost = Eigen::MatrixXd::Ones(1, 2);
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::CostNotSquare));
  }
  {
    DesignProblem p = scalar_pair();
    p.noise_bound = 0.0;
    EXPECT_TRUE(has_violation(validate(p), ViolationCode::NonPositiveNoiseBound));
  }
}

TEST(Validate, ModelsMayHaveDifferentEquationCounts) {
  DesignProblem p = scalar_pair();
  p.faulty.theta_map = Eigen::MatrixXd::Ones(2, 1);
  p.faulty.meas_map = Eigen::MatrixXd::Ones(2, 1);
  p.faulty.noise_map = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_TRUE(validate(p).empty());
}

TEST(Validate, RequireValidThrows) {
  DesignProblem p = scalar_pair();
  p.noise_bound = -1.0;
  EXPECT_THROW(require_valid(p), std::invalid_argument);
  EXPECT_NO_THROW(require_valid(scalar_pair()));
}

TEST(ScaleNoise, UnitBoundIsIdentity) {
  const DesignProblem p = scalar_pair();
  const DesignProblem q = scale_noise(p);
  EXPECT_EQ(q.normal.noise_map, p.normal.noise_map);
  EXPECT_EQ(q.faulty.noise_map, p.faulty.noise_map);
  EXPECT_EQ(q.noise_bound, 1.0);
}

TEST(ScaleNoise, FoldsBoundIntoNoiseMap) {
  DesignProblem p = scalar_pair();
  p.noise_bound = 2.0;
  const DesignProblem q = scale_noise(p);
  EXPECT_EQ(q.normal.noise_map(0, 0), 2.0);
  EXPECT_EQ(q.noise_bound, 1.0);
}

TEST(ScaleNoise, Idempotent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const DesignProblem once = scale_noise(testing::random_problem(rng));
    const DesignProblem twice = scale_noise(once);
    EXPECT_EQ(once.normal.noise_map, twice.normal.noise_map);
    EXPECT_EQ(once.faulty.noise_map, twice.faulty.noise_map);
    EXPECT_EQ(once.noise_bound, twice.noise_bound);
  }
}

TEST(ScaleNoise, SigmaScalesWithBoundSquared) {
  // x = lambda with x >= 1: sigma(0) = 1 at H = 1 and 1/4 once H = 2.
  DesignProblem p = scalar_pair();
  for (auto* m : {&p.normal, &p.faulty}) {
    m->theta_map = Eigen::MatrixXd::Zero(1, 1);
    m->ineq_lhs = Eigen::MatrixXd::Constant(1, 1, -1.0);
    m->ineq_rhs = Eigen::VectorXd::Constant(1, -1.0);
  }
  p.noise_bound = 2.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const auto original = evaluate_sigma(p, zero);
  const auto scaled = evaluate_sigma(scale_noise(p), zero);
  ASSERT_EQ(original.status, SigmaStatus::Optimal);
  ASSERT_EQ(scaled.status, SigmaStatus::Optimal);
  EXPECT_NEAR(original.sigma, 1.0, 1e-7);
  EXPECT_NEAR(original.sigma, 4.0 * scaled.sigma, 1e-7);
}

TEST(ScaleNoise, RejectsBadBound) {
  DesignProblem p = scalar_pair();
  p.noise_bound = std::numeric_limits<double>::infinity();
  EXPECT_THROW((void)scale_noise(p), std::invalid_argument);
}

}  // namespace
}  // namespace auxsig
