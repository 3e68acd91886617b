#pragma once

// Test-side references that do not go through the cone solver.

#include "auxsig/distance.hpp"
#include "auxsig/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <array>
#include <complex>
#include <functional>
#include <random>

namespace auxsig::testing {

// Theta_0 = 1, Theta_1 = -1, X = H = Q = 1. sigma(theta) = theta^2.
inline DesignProblem scalar_pair() {
  DesignProblem p;
  for (auto* m : {&p.normal, &p.faulty}) {
    m->meas_map = Eigen::MatrixXd::Ones(1, 1);
    m->noise_map = Eigen::MatrixXd::Ones(1, 1);
    m->ineq_lhs = Eigen::MatrixXd::Zero(0, 1);
    m->ineq_rhs = Eigen::VectorXd::Zero(0);
  }
  p.normal.theta_map = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.faulty.theta_map = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.cost = Eigen::MatrixXd::Ones(1, 1);
  p.noise_bound = 1.0;
  return p;
}

inline DesignProblem identical_pair() {
  DesignProblem p = scalar_pair();
  p.faulty = p.normal;
  return p;
}

inline double scalar_sigma(double theta) { return theta * theta; }

// Both models share the measurement; with the positive-sequence part at rest
// the best common negative-sequence voltage is the midpoint of z_- theta and
// z_f theta, so sigma = |z_- - z_f|^2 |theta|^2 / 4.
inline double distance_sigma(const distance::PhasorModelSpec& spec, const Eigen::Vector2d& theta) {
  const std::complex<double> dz{spec.z_minus.re - spec.z_fault.re, spec.z_minus.im - spec.z_fault.im};
  return std::norm(dz) * theta.squaredNorm() / 4.0;
}

inline double distance_min_norm(const distance::PhasorModelSpec& spec) {
  const std::complex<double> dz{spec.z_minus.re - spec.z_fault.re, spec.z_minus.im - spec.z_fault.im};
  return 2.0 / std::abs(dz);
}

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index size) {
  return gaussian(rng, size, 1).col(0);
}

struct RandomShape {
  int max_dim = 3;
  bool allow_inequality = true;
  bool full_row_rank_noise = false;  // n_lambda >= n_e
};

inline DesignProblem random_problem(std::mt19937_64& rng, const RandomShape& shape = {}) {
  std::uniform_int_distribution<int> dim(1, shape.max_dim);
  const int nt = dim(rng);
  const int nx = dim(rng);
  DesignProblem p;
  const int m = shape.allow_inequality ? std::uniform_int_distribution<int>(0, 1)(rng) : 0;
  const Eigen::MatrixXd a = gaussian(rng, m, nx);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) b[i] = std::abs(gaussian(rng, 1)[0]);
  for (auto* model : {&p.normal, &p.faulty}) {
    const int ne = dim(rng);
    int nl = dim(rng);
    if (shape.full_row_rank_noise) nl = std::max(nl, ne);
    model->theta_map = gaussian(rng, ne, nt);
    model->meas_map = gaussian(rng, ne, nx);
    model->noise_map = gaussian(rng, ne, nl);
    model->ineq_lhs = a;
    model->ineq_rhs = b;
  }
  const Eigen::MatrixXd r = gaussian(rng, nt, nt);
  p.cost = r * r.transpose() + 0.1 * Eigen::MatrixXd::Identity(nt, nt);
  p.noise_bound = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  return p;
}

inline double golden_minimum(const std::function<double(double)>& f, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

// Brute force over the shared measurement for problems with no inequalities,
// full-row-rank noise maps and n_x <= 2: each model's least noise is the
// minimum-norm solution, and the max of the two is minimized by nested
// golden-section searches on a box wide enough to hold the minimizer.
inline double brute_force_sigma(const DesignProblem& p, const Eigen::VectorXd& theta) {
  std::array<Eigen::MatrixXd, 2> pinv;
  std::array<Eigen::VectorXd, 2> offset;
  double radius = 1.0;
  for (int k = 0; k < 2; ++k) {
    const auto& m = p.model(k);
    pinv[k] = m.noise_map.completeOrthogonalDecomposition().pseudoInverse();
    offset[k] = m.theta_map * theta;
    const Eigen::VectorXd xk = m.meas_map.completeOrthogonalDecomposition().solve(-offset[k]);
    radius = std::max(radius, xk.lpNorm<Eigen::Infinity>());
  }
  radius *= 20.0;
  const auto phi = [&](const Eigen::VectorXd& x) {
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      worst = std::max(worst, (pinv[k] * (offset[k] + p.model(k).meas_map * x)).squaredNorm());
    }
    return worst;
  };
  const auto nx = p.meas_dim();
  if (nx == 1) {
    return golden_minimum([&](double t) { return phi(Eigen::VectorXd::Constant(1, t)); }, -radius, radius);
  }
  return golden_minimum(
      [&](double s) {
        return golden_minimum([&](double t) { return phi(Eigen::Vector2d(s, t)); }, -radius, radius);
      },
      -radius, radius);
}

}  // namespace auxsig::testing
