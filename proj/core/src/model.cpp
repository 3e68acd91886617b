#include "auxsig/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace auxsig {

namespace {

bool finite(const Eigen::MatrixXd& m) { return m.size() == 0 || m.allFinite(); }

void check_model(const StaticModel& model, const char* name, std::vector<Violation>& out) {
  const auto ne = model.theta_map.rows();
  if (model.meas_map.rows() != ne || model.noise_map.rows() != ne) {
    out.push_back({ViolationCode::RowMismatch,
                   fmt::format("{}: theta_map/meas_map/noise_map rows {}/{}/{}", name, ne,
                               model.meas_map.rows(), model.noise_map.rows())});
  }
  if (model.ineq_lhs.rows() != model.ineq_rhs.size()) {
    out.push_back({ViolationCode::InequalityMismatch,
                   fmt::format("{}: ineq_lhs has {} rows, ineq_rhs has {} entries", name,
                               model.ineq_lhs.rows(), model.ineq_rhs.size())});
  }
  if (model.ineq_lhs.rows() > 0 && model.ineq_lhs.cols() != model.meas_map.cols()) {
    out.push_back({ViolationCode::InequalityMismatch,
                   fmt::format("{}: ineq_lhs has {} columns, meas_map has {}", name,
                               model.ineq_lhs.cols(), model.meas_map.cols())});
  }
  if (!finite(model.theta_map) || !finite(model.meas_map) || !finite(model.noise_map) ||
      !finite(model.ineq_lhs) || !finite(model.ineq_rhs)) {
    out.push_back({ViolationCode::NonFinite, fmt::format("{}: non-finite entries", name)});
  }
}

}  // namespace

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::RowMismatch:
      return "row_mismatch";
    case ViolationCode::InequalityMismatch:
      return "inequality_mismatch";
    case ViolationCode::SignalDimMismatch:
      return "signal_dim_mismatch";
    case ViolationCode::MeasDimMismatch:
      return "meas_dim_mismatch";
    case ViolationCode::NonFinite:
      return "non_finite";
    case ViolationCode::CostNotSquare:
      return "cost_not_square";
    case ViolationCode::CostAsymmetric:
      return "cost_asymmetric";
    case ViolationCode::CostNotPsd:
      return "cost_not_psd";
    case ViolationCode::NonPositiveNoiseBound:
      return "nonpositive_noise_bound";
  }
  return "unknown";
}

std::vector<Violation> validate(const DesignProblem& problem) {
  std::vector<Violation> out;
  check_model(problem.normal, "normal", out);
  check_model(problem.faulty, "faulty", out);

  const auto n_theta = problem.normal.theta_map.cols();
  if (problem.faulty.theta_map.cols() != n_theta) {
    out.push_back({ViolationCode::SignalDimMismatch,
                   fmt::format("theta_map columns {} (normal) vs {} (faulty)", n_theta,
                               problem.faulty.theta_map.cols())});
  }
  if (problem.faulty.meas_map.cols() != problem.normal.meas_map.cols()) {
    out.push_back({ViolationCode::MeasDimMismatch,
                   fmt::format("meas_map columns {} (normal) vs {} (faulty)",
                               problem.normal.meas_map.cols(), problem.faulty.meas_map.cols())});
  }

  const auto& q = problem.cost;
  if (q.rows() != q.cols()) {
    out.push_back({ViolationCode::CostNotSquare,
                   fmt::format("cost is {}x{}", q.rows(), q.cols())});
  } else {
    if (q.rows() != n_theta) {
      out.push_back({ViolationCode::SignalDimMismatch,
                     fmt::format("cost is {}x{} but theta has {} entries", q.rows(), q.cols(),
                                 n_theta)});
    }
    if (!finite(q)) {
      out.push_back({ViolationCode::NonFinite, "cost: non-finite entries"});
    } else if (q.size() > 0) {
      const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
      if (asym > kSymmetryTolerance) {
        out.push_back({ViolationCode::CostAsymmetric,
                       fmt::format("cost asymmetry {:.3g}", asym)});
      } else {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
        const double min_eig = eig.eigenvalues().minCoeff();
        const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
        if (min_eig < -kPsdTolerance * spectral) {
          out.push_back({ViolationCode::CostNotPsd,
                         fmt::format("cost minimum eigenvalue {:.6g}", min_eig)});
        }
      }
    }
  }

  if (!(problem.noise_bound > 0.0) || !std::isfinite(problem.noise_bound)) {
    out.push_back({ViolationCode::NonPositiveNoiseBound,
                   fmt::format("noise_bound = {}", problem.noise_bound)});
  }
  return out;
}

bool has_violation(const std::vector<Violation>& report, ViolationCode code) {
  return std::any_of(report.begin(), report.end(),
                     [code](const Violation& v) { return v.code == code; });
}

DesignProblem scale_noise(const DesignProblem& problem) {
  if (!(problem.noise_bound > 0.0) || !std::isfinite(problem.noise_bound)) {
    throw std::invalid_argument(
        fmt::format("noise_bound must be positive, got {}", problem.noise_bound));
  }
  DesignProblem scaled = problem;
  if (problem.noise_bound != 1.0) {
    scaled.normal.noise_map *= problem.noise_bound;
    scaled.faulty.noise_map *= problem.noise_bound;
    scaled.noise_bound = 1.0;
  }
  return scaled;
}

void require_valid(const DesignProblem& problem) {
  const auto report = validate(problem);
  if (report.empty()) return;
  std::string message = "invalid design problem:";
  for (const auto& v : report) {
    message += fmt::format(" [{}] {};", to_string(v.code), v.detail);
  }
  throw std::invalid_argument(message);
}

}  // namespace auxsig
