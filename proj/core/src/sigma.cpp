#include "auxsig/sigma.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace auxsig {

using conic::AffineExpr;
using Eigen::Index;

const char* to_string(SigmaStatus status) {
  switch (status) {
    case SigmaStatus::Optimal:
      return "Optimal";
    case SigmaStatus::Infeasible:
      return "Infeasible";
    case SigmaStatus::Unbounded:
      return "Unbounded";
    case SigmaStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Normal:
      return "Normal";
    case Verdict::Faulty:
      return "Faulty";
    case Verdict::Ambiguous:
      return "Ambiguous";
    case Verdict::InconsistentWithBoth:
      return "InconsistentWithBoth";
  }
  return "Unknown";
}

conic::ConicProgram build_sigma_program(const DesignProblem& problem,
                                        const Eigen::VectorXd& theta) {
  require_valid(problem);
  if (theta.size() != problem.signal_dim()) {
    throw std::invalid_argument(fmt::format("theta has {} entries, expected {}", theta.size(),
                                            problem.signal_dim()));
  }
  const Index nx = problem.meas_dim();
  conic::ProgramBuilder builder;
  const Index x0 = builder.add_variables(nx);
  const Index omega = builder.add_variables(1);
  builder.set_objective(omega, 1.0);

  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem.model(k);
    const Index nl = model.noise_dim();
    const Index l0 = builder.add_variables(nl);
    const Eigen::VectorXd offset = model.theta_map * theta;
    for (Index row = 0; row < model.num_equations(); ++row) {
      AffineExpr eq = AffineExpr::constant_value(offset[row]);
      for (Index j = 0; j < nx; ++j) {
        if (model.meas_map(row, j) != 0.0) eq.add(x0 + j, model.meas_map(row, j));
      }
      for (Index j = 0; j < nl; ++j) {
        if (model.noise_map(row, j) != 0.0) eq.add(l0 + j, -model.noise_map(row, j));
      }
      builder.add_equality(std::move(eq));
    }
    for (Index row = 0; row < model.num_inequalities(); ++row) {
      AffineExpr slack = AffineExpr::constant_value(model.ineq_rhs[row]);
      for (Index j = 0; j < nx; ++j) {
        if (model.ineq_lhs(row, j) != 0.0) slack.add(x0 + j, -model.ineq_lhs(row, j));
      }
      builder.add_nonnegative(std::move(slack));
    }
    // ||lambda_k||^2 <= omega  <=>  4 * omega * (1/4) >= ||lambda_k||^2
    std::vector<AffineExpr> lambda;
    for (Index j = 0; j < nl; ++j) lambda.push_back(AffineExpr::variable(l0 + j));
    builder.add_cone(conic::hyperbolic_cone(AffineExpr::variable(omega),
                                            AffineExpr::constant_value(0.25), std::move(lambda)));
  }
  return builder.build();
}

SigmaResult evaluate_sigma(const DesignProblem& problem, const Eigen::VectorXd& theta,
                           double tolerance) {
  const auto program = build_sigma_program(problem, theta);
  const auto solution = conic::solve(program, tolerance);

  SigmaResult result;
  switch (solution.status) {
    case conic::SolveStatus::Optimal:
      result.status = SigmaStatus::Optimal;
      break;
    case conic::SolveStatus::PrimalInfeasible:
      result.status = SigmaStatus::Infeasible;
      return result;
    case conic::SolveStatus::DualInfeasible:
      result.status = SigmaStatus::Unbounded;
      return result;
    case conic::SolveStatus::NumericalFailure:
      result.status = SigmaStatus::NumericalFailure;
      return result;
  }
  const Index nx = problem.meas_dim();
  const Index n0 = problem.normal.noise_dim();
  const Index n1 = problem.faulty.noise_dim();
  const Eigen::VectorXd& y = solution.primal;
  result.x_star = y.head(nx);
  result.lambda0_star = y.segment(nx + 1, n0);
  result.lambda1_star = y.segment(nx + 1 + n0, n1);
  result.sigma = std::max(0.0, y[nx]);
  return result;
}

std::optional<double> min_noise(const StaticModel& model, const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& x_obs) {
  if (theta.size() != model.signal_dim() || x_obs.size() != model.meas_dim()) {
    throw std::invalid_argument(fmt::format(
        "min_noise: theta has {} entries (expected {}), x_obs has {} (expected {})", theta.size(),
        model.signal_dim(), x_obs.size(), model.meas_dim()));
  }
  if (model.num_inequalities() > 0) {
    const double slack =
        kFeasibilityTolerance *
        (1.0 + (model.ineq_rhs.size() ? model.ineq_rhs.cwiseAbs().maxCoeff() : 0.0));
    const Eigen::VectorXd excess = model.ineq_lhs * x_obs - model.ineq_rhs;
    if (excess.maxCoeff() > slack) return std::nullopt;
  }
  const Eigen::VectorXd residual = model.theta_map * theta + model.meas_map * x_obs;
  if (model.noise_dim() == 0) {
    return residual.norm() <= kRangeTolerance * (1.0 + residual.norm())
               ? std::optional<double>(0.0)
               : std::nullopt;
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(model.noise_map);
  const Eigen::VectorXd lambda = cod.solve(residual);
  const double off_range = (residual - model.noise_map * lambda).norm();
  if (off_range > kRangeTolerance * (1.0 + residual.norm())) return std::nullopt;
  return lambda.norm();
}

Classification classify(const DesignProblem& problem, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& x_obs) {
  require_valid(problem);
  Classification out;
  out.rho0 = min_noise(problem.normal, theta, x_obs);
  out.rho1 = min_noise(problem.faulty, theta, x_obs);
  const double bound = problem.noise_bound;
  const bool normal_ok = out.rho0 && *out.rho0 <= bound;
  const bool faulty_ok = out.rho1 && *out.rho1 <= bound;
  if (normal_ok && faulty_ok) {
    out.verdict = Verdict::Ambiguous;
  } else if (normal_ok) {
    out.verdict = Verdict::Normal;
  } else if (faulty_ok) {
    out.verdict = Verdict::Faulty;
  } else {
    out.verdict = Verdict::InconsistentWithBoth;
  }
  return out;
}

}  // namespace auxsig
