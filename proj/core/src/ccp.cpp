#include "auxsig/ccp.hpp"

#include "auxsig/dual.hpp"
#include "auxsig/sigma.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace auxsig {

using Eigen::Index;

namespace {

constexpr int kStallWindow = 10;

// Ranks run outcomes when no start reaches a separating signal.
int failure_rank(DesignStatus status) {
  switch (status) {
    case DesignStatus::Inseparable:
      return 3;
    case DesignStatus::IterLimit:
      return 2;
    case DesignStatus::SolverFailure:
      return 1;
    case DesignStatus::Separable:
      return 4;
  }
  return 0;
}

DesignResult run(const DesignProblem& original, const DualProgramFactory& factory,
                 const CcpConfig& config, const CcpStart& start) {
  const DesignProblem& problem = factory.scaled_problem();
  DesignResult result;
  result.status = DesignStatus::IterLimit;

  Eigen::VectorXd theta = start.theta;
  std::array<Eigen::VectorXd, 2> beta = start.beta;
  double gamma = config.gamma0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> slack_at_cap;
  bool converged = false;

  for (int z = 0; z < config.max_iters; ++z) {
    const DualProgram sub = factory.ccp_subproblem(theta, beta, gamma);
    auto solution = conic::solve(sub.program, config.conic_tolerance);
    if (solution.status != conic::SolveStatus::Optimal) {
      solution = conic::solve(sub.program, std::max(100.0 * config.conic_tolerance, 1e-6));
    }
    if (solution.status != conic::SolveStatus::Optimal) {
      result.status = DesignStatus::SolverFailure;
      break;
    }
    const Eigen::VectorXd& y = solution.primal;
    theta = y.segment(sub.layout.theta, problem.signal_dim());
    for (int k = 0; k < 2; ++k) {
      beta[k] = y.segment(sub.layout.beta[k], problem.model(k).num_equations());
    }
    const double xi = std::max(0.0, y[sub.layout.xi]);
    const double objective = theta.dot(problem.cost * theta) + gamma * xi;
    result.trace.push_back({z, objective, xi, gamma, theta});

    if (z > 0 && std::abs(objective - previous) <= config.tol_objective * (1.0 + std::abs(objective)) &&
        xi <= config.tol_slack) {
      converged = true;
      break;
    }
    if (gamma >= config.gamma_max) {
      slack_at_cap.push_back(xi);
      const auto count = static_cast<int>(slack_at_cap.size());
      if (xi > config.tol_slack && count > kStallWindow &&
          slack_at_cap[count - 1 - kStallWindow] - xi < config.tol_slack) {
        result.status = DesignStatus::Inseparable;
        break;
      }
    }
    previous = objective;
    gamma = std::min(config.zeta * gamma, config.gamma_max);
  }

  result.theta_star = theta;
  result.cost = theta.dot(original.cost * theta);
  if (converged) {
    const SigmaResult check = evaluate_sigma(original, theta, config.conic_tolerance);
    if (check.status == SigmaStatus::Optimal) {
      result.sigma_verified = check.sigma / (original.noise_bound * original.noise_bound);
      result.status = result.sigma_verified >= 1.0 - 1e-6 ? DesignStatus::Separable
                                                          : DesignStatus::SolverFailure;
    } else if (check.status == SigmaStatus::Infeasible) {
      // No shared measurement explains both models at any noise level.
      result.sigma_verified = std::numeric_limits<double>::infinity();
      result.status = DesignStatus::Separable;
    } else {
      result.status = DesignStatus::SolverFailure;
    }
  }
  return result;
}

}  // namespace

void validate(const CcpConfig& config) {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid CCP configuration: " + what);
  };
  if (!(config.gamma0 > 0.0)) fail(fmt::format("gamma0 = {} must be positive", config.gamma0));
  if (!(config.gamma_max > config.gamma0)) {
    fail(fmt::format("gamma_max = {} must exceed gamma0 = {}", config.gamma_max, config.gamma0));
  }
  if (!(config.zeta > 1.0)) fail(fmt::format("zeta = {} must exceed 1", config.zeta));
  if (config.max_iters < 1) fail("max_iters must be positive");
  if (!(config.tol_objective > 0.0)) fail("tol_objective must be positive");
  if (!(config.tol_slack > 0.0)) fail("tol_slack must be positive");
  if (config.n_starts < 1) fail("n_starts must be positive");
  if (!(config.init_radius > 0.0)) fail("init_radius must be positive");
  if (!(config.conic_tolerance > 0.0)) fail("conic_tolerance must be positive");
}

const char* to_string(DesignStatus status) {
  switch (status) {
    case DesignStatus::Separable:
      return "Separable";
    case DesignStatus::Inseparable:
      return "Inseparable";
    case DesignStatus::IterLimit:
      return "IterLimit";
    case DesignStatus::SolverFailure:
      return "SolverFailure";
  }
  return "Unknown";
}

CcpStart initialize(const DesignProblem& problem, const CcpConfig& config, int start_index) {
  if (start_index < 0 || start_index >= config.n_starts) {
    throw std::out_of_range(
        fmt::format("start index {} outside [0, {})", start_index, config.n_starts));
  }
  const Index nt = problem.signal_dim();
  CcpStart start;
  if (start_index == 0) {
    const auto& t0 = problem.normal.theta_map;
    const auto& t1 = problem.faulty.theta_map;
    const Index rows = std::max(t0.rows(), t1.rows());
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(rows, nt);
    diff.topRows(t1.rows()) += t1;
    diff.topRows(t0.rows()) -= t0;
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(nt);
    if (nt > 0) {
      if (rows > 0) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullV);
        direction = svd.matrixV().col(0);
      } else {
        direction[0] = 1.0;
      }
      Index lead = 0;
      direction.cwiseAbs().maxCoeff(&lead);
      if (direction[lead] < 0.0) direction = -direction;
    }
    start.theta = config.init_radius * direction;
    for (int k = 0; k < 2; ++k) {
      start.beta[k] = Eigen::VectorXd::Zero(problem.model(k).num_equations());
    }
    return start;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed),
                    static_cast<std::uint32_t>(config.rng_seed >> 32),
                    static_cast<std::uint32_t>(start_index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  start.theta = Eigen::VectorXd(nt);
  do {
    for (Index i = 0; i < nt; ++i) start.theta[i] = normal(rng);
  } while (nt > 0 && start.theta.norm() < 1e-12);
  if (nt > 0) start.theta *= config.init_radius / start.theta.norm();
  for (int k = 0; k < 2; ++k) {
    start.beta[k] = Eigen::VectorXd(problem.model(k).num_equations());
    for (Index i = 0; i < start.beta[k].size(); ++i) start.beta[k][i] = 0.1 * normal(rng);
  }
  return start;
}

DesignResult design_from(const DesignProblem& problem, const CcpConfig& config,
                         const CcpStart& start) {
  validate(config);
  const DualProgramFactory factory(problem);
  return run(problem, factory, config, start);
}

DesignResult design(const DesignProblem& problem, const CcpConfig& config) {
  validate(config);
  const DualProgramFactory factory(problem);

  DesignResult best;
  bool have_best = false;
  for (int index = 0; index < config.n_starts; ++index) {
    DesignResult candidate = run(problem, factory, config, initialize(problem, config, index));
    candidate.start_index = index;
    if (!have_best) {
      best = std::move(candidate);
      have_best = true;
      continue;
    }
    const bool better =
        candidate.status == DesignStatus::Separable
            ? best.status != DesignStatus::Separable || candidate.cost < best.cost
            : failure_rank(candidate.status) > failure_rank(best.status);
    if (better) best = std::move(candidate);
  }
  return best;
}

}  // namespace auxsig
