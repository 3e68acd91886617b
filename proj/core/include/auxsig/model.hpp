#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace auxsig {

/// One behavioral mode of a static linear system:
///
///   theta_map * theta + meas_map * x = noise_map * lambda
///   ineq_lhs * x <= ineq_rhs
///
/// with the noise bounded in the Euclidean norm. The inequality block may
/// have zero rows.
struct StaticModel {
  Eigen::MatrixXd theta_map;
  Eigen::MatrixXd meas_map;
  Eigen::MatrixXd noise_map;
  Eigen::MatrixXd ineq_lhs;
  Eigen::VectorXd ineq_rhs;

  [[nodiscard]] Eigen::Index num_equations() const { return theta_map.rows(); }
  [[nodiscard]] Eigen::Index signal_dim() const { return theta_map.cols(); }
  [[nodiscard]] Eigen::Index meas_dim() const { return meas_map.cols(); }
  [[nodiscard]] Eigen::Index noise_dim() const { return noise_map.cols(); }
  [[nodiscard]] Eigen::Index num_inequalities() const { return ineq_rhs.size(); }
};

/// Normal (k = 0) and faulty (k = 1) models, the signal cost matrix and the
/// noise bound ||lambda_k|| <= noise_bound.
struct DesignProblem {
  StaticModel normal;
  StaticModel faulty;
  Eigen::MatrixXd cost;
  double noise_bound = 1.0;

  [[nodiscard]] const StaticModel& model(int k) const { return k == 0 ? normal : faulty; }
  [[nodiscard]] Eigen::Index signal_dim() const { return cost.rows(); }
  [[nodiscard]] Eigen::Index meas_dim() const { return normal.meas_dim(); }
};

enum class ViolationCode {
  RowMismatch,          // theta/meas/noise maps of one model disagree on n_e
  InequalityMismatch,   // ineq_lhs rows != ineq_rhs length, or wrong column count
  SignalDimMismatch,    // theta_map columns differ between models or from cost
  MeasDimMismatch,      // meas_map columns differ between models
  NonFinite,
  CostNotSquare,
  CostAsymmetric,
  CostNotPsd,
  NonPositiveNoiseBound,
};

[[nodiscard]] const char* to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;
};

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-9;

/// Every invariant violation of `problem`; empty when it is well formed.
[[nodiscard]] std::vector<Violation> validate(const DesignProblem& problem);

[[nodiscard]] bool has_violation(const std::vector<Violation>& report, ViolationCode code);

/// Equivalent problem with the noise bound folded into the noise maps
/// (noise_map *= noise_bound, noise_bound = 1). Separability measures of the
/// result are those of the input divided by noise_bound^2.
/// Throws std::invalid_argument for a nonpositive or non-finite bound.
[[nodiscard]] DesignProblem scale_noise(const DesignProblem& problem);

/// Throws std::invalid_argument listing the violations, if any.
void require_valid(const DesignProblem& problem);

}  // namespace auxsig
