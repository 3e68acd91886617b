#pragma once

#include "auxsig/conic.hpp"
#include "auxsig/model.hpp"

#include <Eigen/Dense>

#include <optional>

namespace auxsig {

enum class SigmaStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

[[nodiscard]] const char* to_string(SigmaStatus status);

/// Optimum of the separability program
///
///   minimize    omega
///   subject to  theta_map_k theta + meas_map_k x = noise_map_k lambda_k
///               ineq_lhs_k x <= ineq_rhs_k
///               ||lambda_k||^2 <= omega,            k = 0, 1
///
/// over the shared measurement x and both noises. `sigma` is the smallest
/// worst-case squared noise that explains both models at once.
struct SigmaResult {
  SigmaStatus status = SigmaStatus::NumericalFailure;
  double sigma = 0.0;
  Eigen::VectorXd x_star;
  Eigen::VectorXd lambda0_star;
  Eigen::VectorXd lambda1_star;
};

/// Solves the separability program at a fixed signal. The noise bound of
/// `problem` does not enter; compare the result against noise_bound^2.
/// Throws std::invalid_argument on an invalid problem or a theta of the
/// wrong length.
[[nodiscard]] SigmaResult evaluate_sigma(const DesignProblem& problem,
                                         const Eigen::VectorXd& theta,
                                         double tolerance = conic::kDefaultTolerance);

/// The cone program solved by evaluate_sigma. Variable order:
/// [x, omega, lambda_0, lambda_1].
[[nodiscard]] conic::ConicProgram build_sigma_program(const DesignProblem& problem,
                                                      const Eigen::VectorXd& theta);

inline constexpr double kRangeTolerance = 1e-8;
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Minimum-norm noise explaining an observation under one model, or nullopt
/// when the observation violates the model's inequalities or the residual
/// theta_map theta + meas_map x_obs lies outside the range of noise_map.
[[nodiscard]] std::optional<double> min_noise(const StaticModel& model,
                                              const Eigen::VectorXd& theta,
                                              const Eigen::VectorXd& x_obs);

enum class Verdict { Normal, Faulty, Ambiguous, InconsistentWithBoth };

[[nodiscard]] const char* to_string(Verdict verdict);

/// rho_k empty means model k cannot explain the observation at any noise level.
struct Classification {
  Verdict verdict = Verdict::InconsistentWithBoth;
  std::optional<double> rho0;
  std::optional<double> rho1;
};

/// Decides which model is consistent with an observation at the problem's
/// noise bound.
[[nodiscard]] Classification classify(const DesignProblem& problem, const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& x_obs);

}  // namespace auxsig
