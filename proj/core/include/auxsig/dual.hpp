#pragma once

#include "auxsig/conic.hpp"
#include "auxsig/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace auxsig {

/// Splits the bilinear form beta' Theta theta into concave and convex
/// quadratics of v = [beta; theta]:
///
///   beta' Theta theta = 1/4 v'(Psi - psi I)v + 1/4 v'(Psi + psi I)v,
///   Psi = [0 Theta; Theta' 0],  psi = lambda_max(Psi) = ||Theta||_2.
struct EigenSplit {
  Eigen::MatrixXd psi_matrix;
  double psi_max = 0.0;
  Eigen::Index beta_dim = 0;
  Eigen::Index theta_dim = 0;
};

[[nodiscard]] EigenSplit eigen_split(const Eigen::MatrixXd& theta_map);

struct BilinearParts {
  double concave_part = 0.0;
  double convex_part = 0.0;
};

[[nodiscard]] BilinearParts bilinear_identity(const EigenSplit& split, const Eigen::VectorXd& beta,
                                              const Eigen::VectorXd& theta);

/// Tangent of the convex part at an anchor (beta_z, theta_z):
/// J(beta, theta) = constant + grad_beta' beta + grad_theta' theta.
/// J minorizes the convex part and touches it at the anchor.
struct AffineMinorant {
  double constant = 0.0;
  Eigen::VectorXd grad_beta;
  Eigen::VectorXd grad_theta;

  [[nodiscard]] double evaluate(const Eigen::VectorXd& beta, const Eigen::VectorXd& theta) const {
    return constant + grad_beta.dot(beta) + grad_theta.dot(theta);
  }
};

[[nodiscard]] AffineMinorant linearize_convex_part(const EigenSplit& split,
                                                   const Eigen::VectorXd& beta_z,
                                                   const Eigen::VectorXd& theta_z);

/// Multipliers of the separability program, one set per model.
struct DualVariables {
  std::array<double, 2> alpha{};
  std::array<Eigen::VectorXd, 2> beta;
  std::array<Eigen::VectorXd, 2> epsilon;
  std::array<double, 2> delta{};
};

/// Positions of the dual blocks inside a program built by DualProgramFactory.
/// theta, xi, cost_epigraph and concave_epigraph are -1 in fixed-signal programs.
struct DualLayout {
  Eigen::Index theta = -1;
  std::array<Eigen::Index, 2> alpha{};
  std::array<Eigen::Index, 2> beta{};
  std::array<Eigen::Index, 2> epsilon{};
  std::array<Eigen::Index, 2> delta{};
  Eigen::Index xi = -1;
  Eigen::Index cost_epigraph = -1;
  std::array<Eigen::Index, 2> concave_epigraph{-1, -1};
};

struct DualProgram {
  conic::ConicProgram program;
  DualLayout layout;
};

[[nodiscard]] DualVariables extract_dual_variables(const DesignProblem& problem,
                                                   const DualLayout& layout,
                                                   const Eigen::VectorXd& y);

/// Violations of the simplex, hyperbolic and sign constraints on the
/// multipliers (and of the measurement-stationarity rows), at `tolerance`.
[[nodiscard]] std::vector<std::string> check_dual_invariants(const DesignProblem& problem,
                                                             const DualVariables& dual,
                                                             double tolerance = 1e-8);

/// Builds the fixed-signal feasibility program and the convexified
/// subproblems for one design problem. Per-model eigen splits, the cost
/// square root and the concave-part square roots are computed once at
/// construction. The noise bound is folded into the noise maps.
class DualProgramFactory {
 public:
  explicit DualProgramFactory(const DesignProblem& problem);

  [[nodiscard]] const DesignProblem& scaled_problem() const { return problem_; }
  [[nodiscard]] const EigenSplit& split(int k) const { return splits_[k]; }

  /// Feasibility program in (alpha, beta, epsilon, delta) with the signal
  /// fixed; feasible iff the separability measure at theta is >= 1 (in units
  /// of the noise bound), under strong duality.
  [[nodiscard]] DualProgram fixed_theta(const Eigen::VectorXd& theta) const;

  /// Convex restriction of the design program around (theta_z, beta_z):
  ///
  ///   minimize  theta'Q theta + gamma xi
  ///   s.t.      1 - xi <= sum_k [concave_k(beta_k, theta) + J_k(beta_k, theta)
  ///                              - epsilon_k'b_k - delta_k],   xi >= 0,
  ///             alpha_0 + alpha_1 = 1,
  ///             sum_k meas_map_k' beta_k + ineq_lhs_k' epsilon_k = 0,
  ///             4 alpha_k delta_k >= ||noise_map_k' beta_k||^2,
  ///             alpha_k >= 0, epsilon_k >= 0.
  [[nodiscard]] DualProgram ccp_subproblem(const Eigen::VectorXd& theta_z,
                                           const std::array<Eigen::VectorXd, 2>& beta_z,
                                           double gamma) const;

 private:
  void add_dual_block(conic::ProgramBuilder& builder, DualLayout& layout) const;

  DesignProblem problem_;
  std::array<EigenSplit, 2> splits_;
  Eigen::MatrixXd cost_sqrt_;
  std::array<Eigen::MatrixXd, 2> concave_sqrt_;
};

[[nodiscard]] DualProgram build_fixed_theta_program(const DesignProblem& problem,
                                                    const Eigen::VectorXd& theta);

[[nodiscard]] DualProgram build_ccp_subproblem(const DesignProblem& problem,
                                               const Eigen::VectorXd& theta_z,
                                               const std::array<Eigen::VectorXd, 2>& beta_z,
                                               double gamma);

enum class SeparabilityStatus { Separable, NotSeparable, SolverFailure };

[[nodiscard]] const char* to_string(SeparabilityStatus status);

struct SeparabilityCheck {
  SeparabilityStatus status = SeparabilityStatus::SolverFailure;
  DualVariables witness;  // populated when Separable

  [[nodiscard]] bool separable() const { return status == SeparabilityStatus::Separable; }
};

/// Decides separability at a fixed signal through the dual feasibility
/// program. Solver failures surface as SolverFailure, never as a verdict.
[[nodiscard]] SeparabilityCheck check_separability(const DesignProblem& problem,
                                                   const Eigen::VectorXd& theta,
                                                   double tolerance = conic::kDefaultTolerance);

[[nodiscard]] SeparabilityCheck check_separability(const DualProgramFactory& factory,
                                                   const Eigen::VectorXd& theta,
                                                   double tolerance = conic::kDefaultTolerance);

/// Symmetric square root of a PSD matrix; eigenvalues below
/// kPsdTolerance * spectral norm are clamped to zero.
[[nodiscard]] Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

}  // namespace auxsig
