#include "auxsig/dual.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace auxsig {

using conic::AffineExpr;
using Eigen::Index;

namespace {

Eigen::VectorXd stack(const Eigen::VectorXd& beta, const Eigen::VectorXd& theta) {
  Eigen::VectorXd v(beta.size() + theta.size());
  v << beta, theta;
  return v;
}

void check_anchor(const EigenSplit& split, const Eigen::VectorXd& beta,
                  const Eigen::VectorXd& theta) {
  if (beta.size() != split.beta_dim || theta.size() != split.theta_dim) {
    throw std::invalid_argument(fmt::format("anchor sizes ({}, {}) do not match split ({}, {})",
                                            beta.size(), theta.size(), split.beta_dim,
                                            split.theta_dim));
  }
}

// Affine expressions M * y[offset : offset + cols] for each row of M.
std::vector<AffineExpr> rows_times(const Eigen::MatrixXd& m, Index offset) {
  std::vector<AffineExpr> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) out[i].add(offset + j, m(i, j));
    }
  }
  return out;
}

}  // namespace

EigenSplit eigen_split(const Eigen::MatrixXd& theta_map) {
  if (theta_map.size() > 0 && !theta_map.allFinite()) {
    throw std::invalid_argument("eigen_split: non-finite theta_map");
  }
  const Index ne = theta_map.rows();
  const Index nt = theta_map.cols();
  EigenSplit split;
  split.beta_dim = ne;
  split.theta_dim = nt;
  split.psi_matrix = Eigen::MatrixXd::Zero(ne + nt, ne + nt);
  split.psi_matrix.topRightCorner(ne, nt) = theta_map;
  split.psi_matrix.bottomLeftCorner(nt, ne) = theta_map.transpose();
  if (ne + nt > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(split.psi_matrix,
                                                             Eigen::EigenvaluesOnly);
    split.psi_max = std::max(0.0, eig.eigenvalues().maxCoeff());
  }
  return split;
}

BilinearParts bilinear_identity(const EigenSplit& split, const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& theta) {
  check_anchor(split, beta, theta);
  const Eigen::VectorXd v = stack(beta, theta);
  const double cross = v.dot(split.psi_matrix * v);
  const double sq = split.psi_max * v.squaredNorm();
  return {0.25 * (cross - sq), 0.25 * (cross + sq)};
}

AffineMinorant linearize_convex_part(const EigenSplit& split, const Eigen::VectorXd& beta_z,
                                     const Eigen::VectorXd& theta_z) {
  check_anchor(split, beta_z, theta_z);
  const Eigen::VectorXd v = stack(beta_z, theta_z);
  const Eigen::VectorXd pv = split.psi_matrix * v + split.psi_max * v;
  // 1/4 v'Pv + 1/2 (Pv)'(u - v) = -1/4 v'Pv + 1/2 (Pv)'u
  AffineMinorant out;
  out.constant = -0.25 * v.dot(pv);
  out.grad_beta = 0.5 * pv.head(split.beta_dim);
  out.grad_theta = 0.5 * pv.tail(split.theta_dim);
  return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return m;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd values = eig.eigenvalues();
  const double spectral = values.cwiseAbs().maxCoeff();
  for (Index i = 0; i < values.size(); ++i) {
    values[i] = values[i] <= kPsdTolerance * spectral ? 0.0 : std::sqrt(values[i]);
  }
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------

DualProgramFactory::DualProgramFactory(const DesignProblem& problem) {
  require_valid(problem);
  problem_ = scale_noise(problem);
  for (int k = 0; k < 2; ++k) {
    splits_[k] = eigen_split(problem_.model(k).theta_map);
    const Index dim = splits_[k].psi_matrix.rows();
    concave_sqrt_[k] = psd_sqrt(splits_[k].psi_max * Eigen::MatrixXd::Identity(dim, dim) -
                                splits_[k].psi_matrix);
  }
  cost_sqrt_ = psd_sqrt(problem_.cost);
}

void DualProgramFactory::add_dual_block(conic::ProgramBuilder& builder, DualLayout& layout) const {
  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem_.model(k);
    layout.alpha[k] = builder.add_variables(1);
    layout.beta[k] = builder.add_variables(model.num_equations());
    layout.epsilon[k] = builder.add_variables(model.num_inequalities());
    layout.delta[k] = builder.add_variables(1);
  }

  // alpha_0 + alpha_1 = 1
  builder.add_equality(AffineExpr::variable(layout.alpha[0]) +
                       AffineExpr::variable(layout.alpha[1]) - AffineExpr::constant_value(1.0));

  // sum_k meas_map_k' beta_k + ineq_lhs_k' epsilon_k = 0
  const Index nx = problem_.meas_dim();
  for (Index j = 0; j < nx; ++j) {
    AffineExpr row;
    for (int k = 0; k < 2; ++k) {
      const StaticModel& model = problem_.model(k);
      for (Index i = 0; i < model.num_equations(); ++i) {
        if (model.meas_map(i, j) != 0.0) row.add(layout.beta[k] + i, model.meas_map(i, j));
      }
      for (Index i = 0; i < model.num_inequalities(); ++i) {
        if (model.ineq_lhs(i, j) != 0.0) row.add(layout.epsilon[k] + i, model.ineq_lhs(i, j));
      }
    }
    builder.add_equality(std::move(row));
  }

  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem_.model(k);
    // 4 alpha_k delta_k >= ||noise_map_k' beta_k||^2, alpha_k, delta_k >= 0
    const auto alpha = AffineExpr::variable(layout.alpha[k]);
    const auto delta = AffineExpr::variable(layout.delta[k]);
    builder.add_cone(
        conic::hyperbolic_cone(alpha, delta, rows_times(model.noise_map.transpose(), layout.beta[k])));
    builder.add_nonnegative(alpha);
    builder.add_nonnegative(delta);
    for (Index i = 0; i < model.num_inequalities(); ++i) {
      builder.add_nonnegative(AffineExpr::variable(layout.epsilon[k] + i));
    }
  }
}

DualProgram DualProgramFactory::fixed_theta(const Eigen::VectorXd& theta) const {
  if (theta.size() != problem_.signal_dim()) {
    throw std::invalid_argument(fmt::format("theta has {} entries, expected {}", theta.size(),
                                            problem_.signal_dim()));
  }
  conic::ProgramBuilder builder;
  DualProgram out;
  add_dual_block(builder, out.layout);

  // sum_k beta_k' Theta_k theta - epsilon_k' b_k - delta_k - 1 >= 0
  AffineExpr margin = AffineExpr::constant_value(-1.0);
  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem_.model(k);
    const Eigen::VectorXd coef = model.theta_map * theta;
    for (Index i = 0; i < coef.size(); ++i) {
      if (coef[i] != 0.0) margin.add(out.layout.beta[k] + i, coef[i]);
    }
    for (Index i = 0; i < model.num_inequalities(); ++i) {
      margin.add(out.layout.epsilon[k] + i, -model.ineq_rhs[i]);
    }
    margin.add(out.layout.delta[k], -1.0);
  }
  builder.add_nonnegative(std::move(margin));
  out.program = builder.build();
  return out;
}

DualProgram DualProgramFactory::ccp_subproblem(const Eigen::VectorXd& theta_z,
                                               const std::array<Eigen::VectorXd, 2>& beta_z,
                                               double gamma) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument(fmt::format("gamma must be positive, got {}", gamma));
  }
  const Index nt = problem_.signal_dim();
  if (theta_z.size() != nt) {
    throw std::invalid_argument(
        fmt::format("theta anchor has {} entries, expected {}", theta_z.size(), nt));
  }
  conic::ProgramBuilder builder;
  DualProgram out;
  DualLayout& layout = out.layout;
  layout.theta = builder.add_variables(nt);
  add_dual_block(builder, layout);
  layout.xi = builder.add_variables(1);
  layout.cost_epigraph = builder.add_variables(1);

  builder.set_objective(layout.cost_epigraph, 1.0);
  builder.set_objective(layout.xi, gamma);

  // theta'Q theta <= t  <=>  4 * t * (1/4) >= ||Q^{1/2} theta||^2
  builder.add_cone(conic::hyperbolic_cone(AffineExpr::variable(layout.cost_epigraph),
                                          AffineExpr::constant_value(0.25),
                                          rows_times(cost_sqrt_, layout.theta)));
  builder.add_nonnegative(AffineExpr::variable(layout.xi));

  AffineExpr margin = AffineExpr::constant_value(-1.0);
  margin.add(layout.xi, 1.0);
  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem_.model(k);
    const EigenSplit& split = splits_[k];
    if (beta_z[k].size() != model.num_equations()) {
      throw std::invalid_argument(fmt::format("beta anchor {} has {} entries, expected {}", k,
                                              beta_z[k].size(), model.num_equations()));
    }
    // u_k >= 1/4 v'(psi I - Psi)v  <=>  4 * u_k * 1 >= ||R_k v||^2,  v = [beta_k; theta]
    layout.concave_epigraph[k] = builder.add_variables(1);
    const Index ne = model.num_equations();
    std::vector<AffineExpr> rv(static_cast<std::size_t>(ne + nt));
    for (Index i = 0; i < ne + nt; ++i) {
      for (Index j = 0; j < ne + nt; ++j) {
        const double r = concave_sqrt_[k](i, j);
        if (r == 0.0) continue;
        rv[i].add(j < ne ? layout.beta[k] + j : layout.theta + (j - ne), r);
      }
    }
    builder.add_cone(conic::hyperbolic_cone(AffineExpr::variable(layout.concave_epigraph[k]),
                                            AffineExpr::constant_value(1.0), std::move(rv)));

    const AffineMinorant tangent = linearize_convex_part(split, beta_z[k], theta_z);
    margin.constant += tangent.constant;
    for (Index i = 0; i < ne; ++i) margin.add(layout.beta[k] + i, tangent.grad_beta[i]);
    for (Index i = 0; i < nt; ++i) margin.add(layout.theta + i, tangent.grad_theta[i]);
    margin.add(layout.concave_epigraph[k], -1.0);
    for (Index i = 0; i < model.num_inequalities(); ++i) {
      margin.add(layout.epsilon[k] + i, -model.ineq_rhs[i]);
    }
    margin.add(layout.delta[k], -1.0);
  }
  builder.add_nonnegative(std::move(margin));
  out.program = builder.build();
  return out;
}

// ---------------------------------------------------------------------------

DualVariables extract_dual_variables(const DesignProblem& problem, const DualLayout& layout,
                                     const Eigen::VectorXd& y) {
  DualVariables out;
  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = problem.model(k);
    out.alpha[k] = y[layout.alpha[k]];
    out.delta[k] = y[layout.delta[k]];
    out.beta[k] = y.segment(layout.beta[k], model.num_equations());
    out.epsilon[k] = y.segment(layout.epsilon[k], model.num_inequalities());
  }
  return out;
}

std::vector<std::string> check_dual_invariants(const DesignProblem& problem,
                                               const DualVariables& dual, double tolerance) {
  std::vector<std::string> issues;
  const DesignProblem scaled = scale_noise(problem);
  if (std::abs(dual.alpha[0] + dual.alpha[1] - 1.0) > tolerance) {
    issues.push_back(fmt::format("alpha_0 + alpha_1 = {:.12g}", dual.alpha[0] + dual.alpha[1]));
  }
  Eigen::VectorXd stationarity = Eigen::VectorXd::Zero(scaled.meas_dim());
  for (int k = 0; k < 2; ++k) {
    const StaticModel& model = scaled.model(k);
    if (dual.alpha[k] < -tolerance) {
      issues.push_back(fmt::format("alpha_{} = {:.12g} < 0", k, dual.alpha[k]));
    }
    const double lhs = 4.0 * dual.alpha[k] * dual.delta[k];
    const double rhs = (model.noise_map.transpose() * dual.beta[k]).squaredNorm();
    if (lhs < rhs - tolerance * (1.0 + rhs)) {
      issues.push_back(fmt::format("4 alpha_{0} delta_{0} = {1:.12g} < {2:.12g}", k, lhs, rhs));
    }
    if (dual.epsilon[k].size() > 0 && dual.epsilon[k].minCoeff() < -tolerance) {
      issues.push_back(fmt::format("epsilon_{} has entry {:.12g}", k, dual.epsilon[k].minCoeff()));
    }
    stationarity += model.meas_map.transpose() * dual.beta[k];
    if (model.num_inequalities() > 0) stationarity += model.ineq_lhs.transpose() * dual.epsilon[k];
  }
  if (stationarity.size() > 0 && stationarity.cwiseAbs().maxCoeff() > tolerance) {
    issues.push_back(
        fmt::format("stationarity residual {:.3g}", stationarity.cwiseAbs().maxCoeff()));
  }
  return issues;
}

DualProgram build_fixed_theta_program(const DesignProblem& problem, const Eigen::VectorXd& theta) {
  return DualProgramFactory(problem).fixed_theta(theta);
}

DualProgram build_ccp_subproblem(const DesignProblem& problem, const Eigen::VectorXd& theta_z,
                                 const std::array<Eigen::VectorXd, 2>& beta_z, double gamma) {
  return DualProgramFactory(problem).ccp_subproblem(theta_z, beta_z, gamma);
}

const char* to_string(SeparabilityStatus status) {
  switch (status) {
    case SeparabilityStatus::Separable:
      return "Separable";
    case SeparabilityStatus::NotSeparable:
      return "NotSeparable";
    case SeparabilityStatus::SolverFailure:
      return "SolverFailure";
  }
  return "Unknown";
}

SeparabilityCheck check_separability(const DualProgramFactory& factory,
                                     const Eigen::VectorXd& theta, double tolerance) {
  const DualProgram dual = factory.fixed_theta(theta);
  const auto solution = conic::solve(dual.program, tolerance);
  SeparabilityCheck out;
  switch (solution.status) {
    case conic::SolveStatus::Optimal:
      out.status = SeparabilityStatus::Separable;
      out.witness = extract_dual_variables(factory.scaled_problem(), dual.layout, solution.primal);
      break;
    case conic::SolveStatus::PrimalInfeasible:
      out.status = SeparabilityStatus::NotSeparable;
      break;
    case conic::SolveStatus::DualInfeasible:
    case conic::SolveStatus::NumericalFailure:
      out.status = SeparabilityStatus::SolverFailure;
      break;
  }
  return out;
}

SeparabilityCheck check_separability(const DesignProblem& problem, const Eigen::VectorXd& theta,
                                     double tolerance) {
  return check_separability(DualProgramFactory(problem), theta, tolerance);
}

}  // namespace auxsig
