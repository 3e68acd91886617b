#pragma once

#include "auxsig/ccp.hpp"
#include "auxsig/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace auxsig::distance {

struct Phasor {
  double re = 0.0;
  double im = 0.0;
};

/// Sequence impedances seen by the relay: negative sequence and positive
/// sequence under normal operation, and the apparent impedance under a
/// phase-to-phase fault.
struct PhasorModelSpec {
  Phasor z_minus;
  Phasor z_plus;
  Phasor z_fault;
};

/// Non-fatal remarks about a spec (non-finite values, negative resistance).
[[nodiscard]] std::vector<std::string> warnings(const PhasorModelSpec& spec);

/// Real 2x2 matrix of multiplication by z: [re -im; im re].
[[nodiscard]] Eigen::Matrix2d complex_to_matrix(const Phasor& z);

/// Two-model problem for negative-sequence current injection. The signal is
/// theta = (Re, Im) of the injected current; the measurement is
/// x = (f-, g-, f+, g+, c+, d+), i.e. negative-sequence voltage, positive-
/// sequence voltage and positive-sequence current; the noise stacks the
/// real and imaginary residuals of both sequence equations. Q = I.
/// Throws std::invalid_argument for non-finite impedances.
[[nodiscard]] DesignProblem build_models(const PhasorModelSpec& spec);

enum class CellState { Infeasible, Feasible, Error };

struct GridAxes {
  double re_min = -3.0;
  double re_max = 3.0;
  double im_min = -3.0;
  double im_max = 3.0;
  int n_re = 41;
  int n_im = 41;
};

/// Separability of every node of a rectangular signal grid. Cells are
/// stored with theta_re as the outer index: cell(i_re, i_im) at
/// i_re * n_im + i_im.
struct FeasibilityGrid {
  GridAxes axes;
  std::vector<double> re_values;
  std::vector<double> im_values;
  std::vector<CellState> cells;

  [[nodiscard]] CellState at(int i_re, int i_im) const {
    return cells[static_cast<std::size_t>(i_re) * im_values.size() + i_im];
  }
  [[nodiscard]] std::size_t count(CellState state) const;
};

/// `workers` = 0 uses every hardware thread; results do not depend on it.
/// Throws std::invalid_argument unless n_re, n_im >= 2, the ranges are
/// nonempty and the problem has a two-dimensional signal.
[[nodiscard]] FeasibilityGrid feasibility_grid(const DesignProblem& problem, const GridAxes& axes,
                                               double tolerance = conic::kDefaultTolerance,
                                               std::size_t workers = 0);

[[nodiscard]] FeasibilityGrid feasibility_grid(const PhasorModelSpec& spec, const GridAxes& axes,
                                               double tolerance = conic::kDefaultTolerance,
                                               std::size_t workers = 0);

struct SweepRow {
  double xf = 0.0;
  double theta_re = 0.0;
  double theta_im = 0.0;
  double theta_abs = 0.0;
  double cost = 0.0;
  double sigma = 0.0;
  DesignStatus status = DesignStatus::SolverFailure;
};

/// Designs the optimal signal for z_fault = (spec_base.z_fault.re, xf) at
/// n_points evenly spaced fault reactances in [xf_min, xf_max] (xf_min alone
/// when n_points = 1). Rows are ordered by xf; a failed row is recorded,
/// never dropped.
[[nodiscard]] std::vector<SweepRow> sweep_xf(const PhasorModelSpec& spec_base, double xf_min,
                                             double xf_max, int n_points, const CcpConfig& config,
                                             std::size_t workers = 0);

/// The impedances used in the case study: z- = z+ = 30 + j35, z_f = 26 + j xf.
[[nodiscard]] PhasorModelSpec reference_spec(double xf);

}  // namespace auxsig::distance
