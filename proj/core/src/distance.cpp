#include "auxsig/distance.hpp"

#include "auxsig/dual.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace auxsig::distance {

namespace {

bool finite(const Phasor& z) { return std::isfinite(z.re) && std::isfinite(z.im); }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

std::vector<std::string> warnings(const PhasorModelSpec& spec) {
  std::vector<std::string> out;
  const std::pair<const char*, const Phasor*> entries[] = {
      {"z_minus", &spec.z_minus}, {"z_plus", &spec.z_plus}, {"z_fault", &spec.z_fault}};
  for (const auto& [name, z] : entries) {
    if (!finite(*z)) {
      out.push_back(fmt::format("{} is not finite", name));
    } else if (z->re < 0.0) {
      out.push_back(fmt::format("{} has negative resistance {}", name, z->re));
    }
  }
  return out;
}

Eigen::Matrix2d complex_to_matrix(const Phasor& z) {
  Eigen::Matrix2d m;
  m << z.re, -z.im, z.im, z.re;
  return m;
}

DesignProblem build_models(const PhasorModelSpec& spec) {
  if (!finite(spec.z_minus) || !finite(spec.z_plus) || !finite(spec.z_fault)) {
    throw std::invalid_argument("impedances must be finite");
  }
  const Eigen::Matrix2d m_minus = complex_to_matrix(spec.z_minus);
  const Eigen::Matrix2d m_plus = complex_to_matrix(spec.z_plus);
  const Eigen::Matrix2d m_fault = complex_to_matrix(spec.z_fault);
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();

  const auto make = [&](const Eigen::Matrix2d& m_neg, const Eigen::Matrix2d& m_pos) {
    StaticModel model;
    model.theta_map = Eigen::MatrixXd::Zero(4, 2);
    model.theta_map.topRows(2) = -m_neg;
    model.meas_map = Eigen::MatrixXd::Zero(4, 6);
    model.meas_map.block(0, 0, 2, 2) = eye;
    model.meas_map.block(2, 2, 2, 2) = eye;
    model.meas_map.block(2, 4, 2, 2) = -m_pos;
    model.noise_map = Eigen::MatrixXd::Identity(4, 4);
    model.ineq_lhs = Eigen::MatrixXd::Zero(0, 6);
    model.ineq_rhs = Eigen::VectorXd::Zero(0);
    return model;
  };

  DesignProblem problem;
  problem.normal = make(m_minus, m_plus);
  problem.faulty = make(m_fault, m_fault);
  problem.cost = Eigen::MatrixXd::Identity(2, 2);
  problem.noise_bound = 1.0;
  return problem;
}

PhasorModelSpec reference_spec(double xf) { return {{30.0, 35.0}, {30.0, 35.0}, {26.0, xf}}; }

std::size_t FeasibilityGrid::count(CellState state) const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), state));
}

FeasibilityGrid feasibility_grid(const DesignProblem& problem, const GridAxes& axes,
                                 double tolerance, std::size_t workers) {
  if (axes.n_re < 2 || axes.n_im < 2) {
    throw std::invalid_argument("grid needs at least two nodes per axis");
  }
  if (!(axes.re_min < axes.re_max) || !(axes.im_min < axes.im_max)) {
    throw std::invalid_argument("grid ranges must satisfy min < max");
  }
  if (problem.signal_dim() != 2) {
    throw std::invalid_argument(
        fmt::format("grid needs a two-dimensional signal, problem has {}", problem.signal_dim()));
  }
  const DualProgramFactory factory(problem);

  FeasibilityGrid grid;
  grid.axes = axes;
  grid.re_values = linspace(axes.re_min, axes.re_max, axes.n_re);
  grid.im_values = linspace(axes.im_min, axes.im_max, axes.n_im);
  const std::size_t n_im = grid.im_values.size();
  grid.cells.assign(grid.re_values.size() * n_im, CellState::Error);

  detail::parallel_for(grid.cells.size(), workers, [&](std::size_t index) {
    const Eigen::Vector2d theta(grid.re_values[index / n_im], grid.im_values[index % n_im]);
    try {
      const auto check = check_separability(factory, theta, tolerance);
      switch (check.status) {
        case SeparabilityStatus::Separable:
          grid.cells[index] = CellState::Feasible;
          break;
        case SeparabilityStatus::NotSeparable:
          grid.cells[index] = CellState::Infeasible;
          break;
        case SeparabilityStatus::SolverFailure:
          grid.cells[index] = CellState::Error;
          break;
      }
    } catch (const std::exception&) {
      grid.cells[index] = CellState::Error;
    }
  });
  return grid;
}

FeasibilityGrid feasibility_grid(const PhasorModelSpec& spec, const GridAxes& axes,
                                 double tolerance, std::size_t workers) {
  return feasibility_grid(build_models(spec), axes, tolerance, workers);
}

std::vector<SweepRow> sweep_xf(const PhasorModelSpec& spec_base, double xf_min, double xf_max,
                               int n_points, const CcpConfig& config, std::size_t workers) {
  if (n_points < 1) throw std::invalid_argument("sweep needs at least one point");
  if (n_points > 1 && !(xf_min < xf_max)) {
    throw std::invalid_argument(fmt::format("sweep range [{}, {}] is empty", xf_min, xf_max));
  }
  validate(config);
  const std::vector<double> xfs = linspace(xf_min, xf_max, n_points);
  std::vector<SweepRow> rows(xfs.size());
  detail::parallel_for(rows.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.xf = xfs[i];
    PhasorModelSpec spec = spec_base;
    spec.z_fault.im = xfs[i];
    try {
      const DesignResult result = design(build_models(spec), config);
      row.status = result.status;
      row.theta_re = result.theta_star.size() == 2 ? result.theta_star[0] : 0.0;
      row.theta_im = result.theta_star.size() == 2 ? result.theta_star[1] : 0.0;
      row.theta_abs = std::hypot(row.theta_re, row.theta_im);
      row.cost = result.cost;
      row.sigma = result.sigma_verified;
    } catch (const std::exception&) {
      row.status = DesignStatus::SolverFailure;
    }
  });
  return rows;
}

}  // namespace auxsig::distance
