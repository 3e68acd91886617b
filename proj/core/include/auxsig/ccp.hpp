#pragma once

#include "auxsig/conic.hpp"
#include "auxsig/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace auxsig {

/// Penalty convex-concave procedure settings. The penalty weight follows
/// gamma <- min(zeta * gamma, gamma_max) after every subproblem.
struct CcpConfig {
  double gamma0 = 1.0;
  double gamma_max = 1e4;
  double zeta = 1.5;
  int max_iters = 200;
  double tol_objective = 1e-6;
  double tol_slack = 1e-6;
  int n_starts = 5;
  std::uint64_t rng_seed = 0;
  double init_radius = 1.0;
  double conic_tolerance = conic::kDefaultTolerance;
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const CcpConfig& config);

enum class DesignStatus { Separable, Inseparable, IterLimit, SolverFailure };

[[nodiscard]] const char* to_string(DesignStatus status);

struct CcpIterate {
  int iteration = 0;
  double objective = 0.0;  // theta'Q theta + gamma * xi
  double slack = 0.0;      // xi
  double gamma = 0.0;
  Eigen::VectorXd theta;
};

struct DesignResult {
  DesignStatus status = DesignStatus::SolverFailure;
  Eigen::VectorXd theta_star;
  double cost = 0.0;
  double sigma_verified = 0.0;  // separability measure at theta_star, in noise-bound units
  int start_index = -1;
  std::vector<CcpIterate> trace;  // of the reported run
};

struct CcpStart {
  Eigen::VectorXd theta;
  std::array<Eigen::VectorXd, 2> beta;
};

/// Start 0 points theta along the leading right singular vector of
/// theta_map_1 - theta_map_0 (scaled to init_radius) with beta = 0. Later
/// starts draw theta uniformly on the sphere of radius init_radius and beta
/// from 0.1 * N(0, I), seeded by (rng_seed, start_index).
/// Throws std::out_of_range when start_index >= n_starts.
[[nodiscard]] CcpStart initialize(const DesignProblem& problem, const CcpConfig& config,
                                  int start_index);

/// Runs the penalty CCP from every start and returns the cheapest run whose
/// final slack is within tol_slack, re-verified with evaluate_sigma.
[[nodiscard]] DesignResult design(const DesignProblem& problem, const CcpConfig& config = {});

/// Runs a single start; exposed for diagnostics and tests.
[[nodiscard]] DesignResult design_from(const DesignProblem& problem, const CcpConfig& config,
                                       const CcpStart& start);

}  // namespace auxsig
