#include "auxsig/conic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace auxsig::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Fn>
void for_each_block(std::span<const Cone> layout, Fn&& fn) {
  Index offset = 0;
  for (const auto& cone : layout) {
    fn(cone, offset);
    offset += cone.dim;
  }
}

Index cone_degree(std::span<const Cone> layout) {
  Index degree = 0;
  for (const auto& cone : layout) {
    degree += cone.kind == Cone::Kind::NonnegativeOrthant ? cone.dim : 1;
  }
  return degree;
}

Eigen::VectorXd cone_identity(std::span<const Cone> layout, Index rows) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      e.segment(offset, cone.dim).setOnes();
    } else {
      e[offset] = 1.0;
    }
  });
  return e;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Smallest positive root of a t^2 + 2 b t + c with c > 0.
double first_positive_root(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    return b < 0.0 ? -c / (2.0 * b) : kInf;
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;
  const double root = std::sqrt(disc);
  const double q = -(b + std::copysign(root, b));
  double best = kInf;
  if (q != 0.0) {
    for (double t : {q / a, c / q}) {
      if (t > 0.0) best = std::min(best, t);
    }
  } else if (-b / a > 0.0) {
    best = -b / a;
  }
  return best;
}

// Symmetric indefinite KKT system
//   [ 0   E'   (W^-1 G)' ] [ux]   [r1]
//   [ E   0    0         ] [uw] = [r2]
//   [ W^-1 G 0  -I       ] [W uz] [W^-1 r3]
// factorized once per iteration, solved with iterative refinement against
// the unregularized matrix.
class KktSolver {
 public:
  KktSolver(const Eigen::MatrixXd& eq_lhs, const Eigen::MatrixXd& cone_lhs,
            const Eigen::MatrixXd& w_inv)
      : n_(eq_lhs.cols()), p_(eq_lhs.rows()), m_(cone_lhs.rows()), w_inv_(w_inv) {
    const Index dim = n_ + p_ + m_;
    kkt_ = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::MatrixXd scaled_g = w_inv * cone_lhs;
    kkt_.block(0, n_, n_, p_) = eq_lhs.transpose();
    kkt_.block(n_, 0, p_, n_) = eq_lhs;
    kkt_.block(0, n_ + p_, n_, m_) = scaled_g.transpose();
    kkt_.block(n_ + p_, 0, m_, n_) = scaled_g;
    kkt_.block(n_ + p_, n_ + p_, m_, m_) = -Eigen::MatrixXd::Identity(m_, m_);

    const double scale = dim > 0 ? std::max(1.0, kkt_.cwiseAbs().maxCoeff()) : 1.0;
    const double reg = 1e-11 * scale;
    Eigen::MatrixXd regularized = kkt_;
    regularized.topLeftCorner(n_, n_).diagonal().array() += reg;
    regularized.block(n_, n_, p_, p_).diagonal().array() -= reg;
    lu_.compute(regularized);
  }

  struct Solution {
    Eigen::VectorXd x, w, z;
  };

  [[nodiscard]] Solution solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                               const Eigen::VectorXd& r3) const {
    Eigen::VectorXd rhs(n_ + p_ + m_);
    rhs << r1, r2, w_inv_ * r3;
    Eigen::VectorXd sol = lu_.solve(rhs);
    for (int pass = 0; pass < 3; ++pass) {
      const Eigen::VectorXd residual = rhs - kkt_ * sol;
      if (inf_norm(residual) <= 1e-15 * (1.0 + inf_norm(rhs))) break;
      sol += lu_.solve(residual);
    }
    return {sol.head(n_), sol.segment(n_, p_), w_inv_ * sol.tail(m_)};
  }

 private:
  Index n_, p_, m_;
  Eigen::MatrixXd w_inv_;
  Eigen::MatrixXd kkt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct Direction {
  Eigen::VectorXd x, w, z, s;
  double tau = 0.0;
  double kappa = 0.0;
};

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::PrimalInfeasible:
      return "PrimalInfeasible";
    case SolveStatus::DualInfeasible:
      return "DualInfeasible";
    case SolveStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

std::vector<std::string> check_program(const ConicProgram& program) {
  std::vector<std::string> issues;
  const Index n = program.num_variables();
  if (program.eq_lhs.rows() != program.eq_rhs.size()) {
    issues.push_back(fmt::format("eq_lhs has {} rows but eq_rhs has {} entries",
                                 program.eq_lhs.rows(), program.eq_rhs.size()));
  }
  if (program.eq_lhs.rows() > 0 && program.eq_lhs.cols() != n) {
    issues.push_back(fmt::format("eq_lhs has {} columns, expected {}", program.eq_lhs.cols(), n));
  }
  if (program.cone_lhs.rows() != program.cone_rhs.size()) {
    issues.push_back(fmt::format("cone_lhs has {} rows but cone_rhs has {} entries",
                                 program.cone_lhs.rows(), program.cone_rhs.size()));
  }
  if (program.cone_lhs.rows() > 0 && program.cone_lhs.cols() != n) {
    issues.push_back(
        fmt::format("cone_lhs has {} columns, expected {}", program.cone_lhs.cols(), n));
  }
  Index total = 0;
  for (const auto& cone : program.cone_layout) {
    if (cone.dim < 1) issues.emplace_back("cone block with dimension < 1");
    total += cone.dim;
  }
  if (total != program.cone_rhs.size()) {
    issues.push_back(fmt::format("cone layout covers {} rows, program has {}", total,
                                 program.cone_rhs.size()));
  }
  const auto finite = [](const auto& m) { return m.size() == 0 || m.allFinite(); };
  if (!finite(program.objective) || !finite(program.eq_lhs) || !finite(program.eq_rhs) ||
      !finite(program.cone_lhs) || !finite(program.cone_rhs)) {
    issues.emplace_back("non-finite program data");
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Cone primitives

namespace detail {

double max_step(std::span<const Cone> layout, const Eigen::VectorXd& u, const Eigen::VectorXd& du) {
  double step = kInf;
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      for (Index i = offset; i < offset + cone.dim; ++i) {
        if (du[i] < 0.0) step = std::min(step, -u[i] / du[i]);
      }
      return;
    }
    const double u0 = u[offset];
    const double d0 = du[offset];
    const auto u1 = u.segment(offset + 1, cone.dim - 1);
    const auto d1 = du.segment(offset + 1, cone.dim - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = u0 * d0 - u1.dot(d1);
    const double c = std::max(u0 * u0 - u1.squaredNorm(), 0.0);
    step = std::min(step, first_positive_root(a, b, c));
    if (d0 < 0.0) step = std::min(step, -u0 / d0);
  });
  return step;
}

double interior_margin(std::span<const Cone> layout, const Eigen::VectorXd& u) {
  double margin = kInf;
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      margin = std::min(margin, u.segment(offset, cone.dim).minCoeff());
    } else {
      margin = std::min(margin, u[offset] - u.segment(offset + 1, cone.dim - 1).norm());
    }
  });
  return margin;
}

NtScaling nt_scaling(std::span<const Cone> layout, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& z) {
  const Index m = s.size();
  NtScaling out{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd(m)};
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    const Index d = cone.dim;
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      for (Index i = offset; i < offset + d; ++i) {
        const double w = std::sqrt(s[i] / z[i]);
        out.w(i, i) = w;
        out.w_inv(i, i) = 1.0 / w;
        out.lambda[i] = std::sqrt(s[i] * z[i]);
      }
      return;
    }
    const auto sb = s.segment(offset, d);
    const auto zb = z.segment(offset, d);
    const double s_det = std::max(sb[0] * sb[0] - sb.tail(d - 1).squaredNorm(), 1e-300);
    const double z_det = std::max(zb[0] * zb[0] - zb.tail(d - 1).squaredNorm(), 1e-300);
    const double s_nrm = std::sqrt(s_det);
    const double z_nrm = std::sqrt(z_det);
    const Eigen::VectorXd s_bar = sb / s_nrm;
    const Eigen::VectorXd z_bar = zb / z_nrm;
    const double gamma = std::sqrt(std::max((1.0 + s_bar.dot(z_bar)) / 2.0, 0.0));
    Eigen::VectorXd w_bar(d);
    w_bar[0] = (s_bar[0] + z_bar[0]) / (2.0 * gamma);
    w_bar.tail(d - 1) = (s_bar.tail(d - 1) - z_bar.tail(d - 1)) / (2.0 * gamma);
    const double eta = std::sqrt(s_nrm / z_nrm);

    Eigen::MatrixXd block(d, d);
    const auto w1 = w_bar.tail(d - 1);
    block(0, 0) = w_bar[0];
    block.block(0, 1, 1, d - 1) = w1.transpose();
    block.block(1, 0, d - 1, 1) = w1;
    block.block(1, 1, d - 1, d - 1) = Eigen::MatrixXd::Identity(d - 1, d - 1) +
                                      w1 * w1.transpose() / (1.0 + w_bar[0]);
    Eigen::MatrixXd inv = block;
    inv.block(0, 1, 1, d - 1) *= -1.0;
    inv.block(1, 0, d - 1, 1) *= -1.0;

    out.w.block(offset, offset, d, d) = eta * block;
    out.w_inv.block(offset, offset, d, d) = inv / eta;
    out.lambda.segment(offset, d) = eta * block * zb;
  });
  return out;
}

Eigen::VectorXd jordan_product(std::span<const Cone> layout, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) {
  Eigen::VectorXd out(u.size());
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    const Index d = cone.dim;
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      out.segment(offset, d) = u.segment(offset, d).cwiseProduct(v.segment(offset, d));
      return;
    }
    out[offset] = u.segment(offset, d).dot(v.segment(offset, d));
    out.segment(offset + 1, d - 1) =
        u[offset] * v.segment(offset + 1, d - 1) + v[offset] * u.segment(offset + 1, d - 1);
  });
  return out;
}

Eigen::VectorXd jordan_divide(std::span<const Cone> layout, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& d) {
  Eigen::VectorXd out(u.size());
  for_each_block(layout, [&](const Cone& cone, Index offset) {
    const Index k = cone.dim;
    if (cone.kind == Cone::Kind::NonnegativeOrthant) {
      out.segment(offset, k) = d.segment(offset, k).cwiseQuotient(u.segment(offset, k));
      return;
    }
    const double u0 = u[offset];
    const auto u1 = u.segment(offset + 1, k - 1);
    const double d0 = d[offset];
    const auto d1 = d.segment(offset + 1, k - 1);
    const double det = u0 * u0 - u1.squaredNorm();
    const double q0 = (u0 * d0 - u1.dot(d1)) / det;
    out[offset] = q0;
    out.segment(offset + 1, k - 1) = (d1 - q0 * u1) / u0;
  });
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Solver

ConicSolution solve(const ConicProgram& program, const SolverOptions& options) {
  if (auto issues = check_program(program); !issues.empty()) {
    throw std::invalid_argument(fmt::format("invalid cone program: {}", fmt::join(issues, "; ")));
  }
  const Index n = program.num_variables();
  const Index p = program.num_equalities();
  const Index m = program.num_cone_rows();
  const std::span<const Cone> layout(program.cone_layout);
  const Eigen::VectorXd& c = program.objective;
  const Eigen::VectorXd& b = program.eq_rhs;
  const Eigen::VectorXd& h = program.cone_rhs;
  const Eigen::MatrixXd E = p > 0 ? program.eq_lhs : Eigen::MatrixXd::Zero(0, n);
  const Eigen::MatrixXd G = m > 0 ? program.cone_lhs : Eigen::MatrixXd::Zero(0, n);
  const double tol = options.tolerance;
  const double degree = static_cast<double>(cone_degree(layout));
  const Eigen::VectorXd e = cone_identity(layout, m);

  const double c_scale = 1.0 + inf_norm(c);
  const double b_scale = 1.0 + inf_norm(b);
  const double h_scale = 1.0 + inf_norm(h);

  ConicSolution result;

  // Starting point from two least-squares solves with W = I.
  Eigen::VectorXd x, w, z, s;
  {
    const KktSolver kkt(E, G, Eigen::MatrixXd::Identity(m, m));
    const auto primal = kkt.solve(Eigen::VectorXd::Zero(n), b, h);
    x = primal.x;
    s = -primal.z;
    const auto dual = kkt.solve(-c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m));
    w = dual.w;
    z = dual.z;
    for (Eigen::VectorXd* v : {&s, &z}) {
      if (m == 0) break;
      const double shift = -detail::interior_margin(layout, *v);
      if (shift >= -1e-8 * std::max(1.0, v->norm())) *v += (1.0 + shift) * e;
    }
  }
  double tau = 1.0;
  double kappa = 1.0;

  int stalled = 0;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (!x.allFinite() || !z.allFinite() || !s.allFinite() || !w.allFinite() ||
        !std::isfinite(tau) || !std::isfinite(kappa)) {
      break;
    }
    const Eigen::VectorXd dual_lin = E.transpose() * w + G.transpose() * z;
    const Eigen::VectorXd rx = dual_lin + c * tau;
    const Eigen::VectorXd ry = E * x - b * tau;
    const Eigen::VectorXd rz = s + G * x - h * tau;
    const double cx = c.dot(x);
    const double bw = b.dot(w);
    const double hz = h.dot(z);
    const double rt = kappa + cx + bw + hz;
    const double gap = s.dot(z);

    const double pcost = cx / tau;
    const double dcost = -(bw + hz) / tau;
    const double pres = std::max(inf_norm(ry) / b_scale, inf_norm(rz) / h_scale) / tau;
    const double dres = inf_norm(rx) / c_scale / tau;
    const double scaled_gap = gap / (tau * tau);
    const double obj_scale = 1.0 + std::abs(pcost);

    if (pres <= tol && dres <= tol && scaled_gap <= tol * obj_scale &&
        std::abs(pcost - dcost) <= tol * obj_scale) {
      result.status = SolveStatus::Optimal;
      result.primal = x / tau;
      result.slacks = s / tau;
      result.eq_duals = w / tau;
      result.cone_duals = z / tau;
      result.objective_value = pcost;
      result.dual_objective_value = dcost;
      return result;
    }
    if (bw + hz < 0.0 && inf_norm(dual_lin) / (-(bw + hz)) <= tol) {
      const double scale = -(bw + hz);
      result.status = SolveStatus::PrimalInfeasible;
      result.primal = Eigen::VectorXd::Zero(n);
      result.slacks = Eigen::VectorXd::Zero(m);
      result.eq_duals = w / scale;
      result.cone_duals = z / scale;
      return result;
    }
    if (cx < 0.0) {
      const double ray_res = std::max(inf_norm(E * x), inf_norm(G * x + s));
      if (ray_res / (-cx) <= tol) {
        result.status = SolveStatus::DualInfeasible;
        result.primal = x / (-cx);
        result.slacks = s / (-cx);
        result.eq_duals = Eigen::VectorXd::Zero(p);
        result.cone_duals = Eigen::VectorXd::Zero(m);
        return result;
      }
    }
    if (iter == options.max_iterations) break;

    const auto scaling = detail::nt_scaling(layout, s, z);
    const Eigen::VectorXd& lambda = scaling.lambda;
    const double mu = (gap + tau * kappa) / (degree + 1.0);
    const KktSolver kkt(E, G, scaling.w_inv);
    const auto tau_dir = kkt.solve(-c, b, h);
    const double tau_den = c.dot(tau_dir.x) + b.dot(tau_dir.w) + h.dot(tau_dir.z) - kappa / tau;

    const auto newton = [&](double keep, const Eigen::VectorXd& ds_rhs, double dk_rhs) {
      const Eigen::VectorXd q = detail::jordan_divide(layout, lambda, ds_rhs);
      const auto base = kkt.solve(-keep * rx, -keep * ry, -keep * rz - scaling.w * q);
      Direction d;
      d.tau = (-keep * rt - dk_rhs / tau -
               (c.dot(base.x) + b.dot(base.w) + h.dot(base.z))) /
              tau_den;
      d.x = base.x + d.tau * tau_dir.x;
      d.w = base.w + d.tau * tau_dir.w;
      d.z = base.z + d.tau * tau_dir.z;
      // From the linearized primal rows rather than W (q - W dz): the latter
      // amplifies solve error by ||W||, which blows up near the boundary.
      d.s = -keep * rz - G * d.x + h * d.tau;
      d.kappa = (dk_rhs - kappa * d.tau) / tau;
      return d;
    };
    const auto step_to_boundary = [&](const Direction& d) {
      double step = std::min(detail::max_step(layout, s, d.s), detail::max_step(layout, z, d.z));
      if (d.tau < 0.0) step = std::min(step, -tau / d.tau);
      if (d.kappa < 0.0) step = std::min(step, -kappa / d.kappa);
      return step;
    };

    const Eigen::VectorXd lambda_sq = detail::jordan_product(layout, lambda, lambda);
    const Direction affine = newton(1.0, -lambda_sq, -tau * kappa);
    const double affine_step = std::min(1.0, step_to_boundary(affine));
    const double sigma = std::pow(std::max(0.0, 1.0 - affine_step), 3.0);

    const Eigen::VectorXd correction = detail::jordan_product(
        layout, scaling.w_inv * affine.s, scaling.w * affine.z);
    const Direction combined =
        newton(1.0 - sigma, -lambda_sq + sigma * mu * e - correction,
               -tau * kappa + sigma * mu - affine.tau * affine.kappa);
    const double step = std::min(1.0, 0.99 * step_to_boundary(combined));
    if (!std::isfinite(step) || step < 1e-12) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }

    x += step * combined.x;
    w += step * combined.w;
    z += step * combined.z;
    s += step * combined.s;
    tau += step * combined.tau;
    kappa += step * combined.kappa;
  }
  result.status = SolveStatus::NumericalFailure;
  result.primal = x / tau;
  result.slacks = s / tau;
  result.eq_duals = w / tau;
  result.cone_duals = z / tau;
  result.objective_value = c.dot(x) / tau;
  return result;
}

// ---------------------------------------------------------------------------
// Assembly

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double scale) {
  for (auto& term : terms) term.second *= scale;
  constant *= scale;
  return *this;
}

double AffineExpr::evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  double value = constant;
  for (const auto& [index, coef] : terms) value += coef * y[index];
  return value;
}

AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs) { return lhs += rhs; }

AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs) {
  AffineExpr neg = rhs;
  neg *= -1.0;
  return lhs += neg;
}

AffineExpr operator*(double scale, AffineExpr expr) { return expr *= scale; }

ConeRows hyperbolic_cone(const AffineExpr& a, const AffineExpr& d, std::vector<AffineExpr> v) {
  ConeRows block{Cone::second_order(static_cast<Index>(v.size()) + 2), {}};
  block.rows.reserve(v.size() + 2);
  block.rows.push_back(a + d);
  for (auto& entry : v) block.rows.push_back(std::move(entry));
  block.rows.push_back(a - d);
  return block;
}

std::vector<ConeRows> rewrite_hyperbolic(Index num_variables, Index alpha_index, Index delta_index,
                                         std::span<const Index> vector_indices) {
  const auto check = [num_variables](Index index) {
    if (index < 0 || index >= num_variables) {
      throw std::out_of_range(
          fmt::format("variable index {} outside [0, {})", index, num_variables));
    }
  };
  check(alpha_index);
  check(delta_index);
  std::vector<AffineExpr> v;
  v.reserve(vector_indices.size());
  for (Index index : vector_indices) {
    check(index);
    v.push_back(AffineExpr::variable(index));
  }
  const auto alpha = AffineExpr::variable(alpha_index);
  const auto delta = AffineExpr::variable(delta_index);
  return {hyperbolic_cone(alpha, delta, std::move(v)),
          ConeRows{Cone::orthant(2), {alpha, delta}}};
}

bool satisfied(const ConeRows& block, const Eigen::Ref<const Eigen::VectorXd>& y, double slack) {
  Eigen::VectorXd values(static_cast<Index>(block.rows.size()));
  for (Index i = 0; i < values.size(); ++i) values[i] = block.rows[i].evaluate(y);
  if (block.cone.kind == Cone::Kind::NonnegativeOrthant) {
    return values.size() == 0 || values.minCoeff() >= -slack;
  }
  return values[0] - values.tail(values.size() - 1).norm() >= -slack;
}

Index ProgramBuilder::add_variables(Index count) {
  const Index first = num_variables_;
  num_variables_ += count;
  return first;
}

void ProgramBuilder::set_objective(Index index, double coef) { objective_.emplace_back(index, coef); }

void ProgramBuilder::add_equality(AffineExpr expr) { equalities_.push_back(std::move(expr)); }

void ProgramBuilder::add_nonnegative(AffineExpr expr) {
  cones_.push_back(ConeRows{Cone::orthant(1), {std::move(expr)}});
}

void ProgramBuilder::add_cone(ConeRows block) {
  if (static_cast<Index>(block.rows.size()) != block.cone.dim) {
    throw std::invalid_argument("cone block row count does not match its dimension");
  }
  cones_.push_back(std::move(block));
}

void ProgramBuilder::add_cones(std::vector<ConeRows> blocks) {
  for (auto& block : blocks) add_cone(std::move(block));
}

ConicProgram ProgramBuilder::build() const {
  const Index n = num_variables_;
  const auto check = [n](Index index) {
    if (index < 0 || index >= n) {
      throw std::out_of_range(fmt::format("variable index {} outside [0, {})", index, n));
    }
  };
  ConicProgram program;
  program.objective = Eigen::VectorXd::Zero(n);
  for (const auto& [index, coef] : objective_) {
    check(index);
    program.objective[index] += coef;
  }

  const auto p = static_cast<Index>(equalities_.size());
  program.eq_lhs = Eigen::MatrixXd::Zero(p, n);
  program.eq_rhs = Eigen::VectorXd::Zero(p);
  for (Index row = 0; row < p; ++row) {
    for (const auto& [index, coef] : equalities_[row].terms) {
      check(index);
      program.eq_lhs(row, index) += coef;
    }
    program.eq_rhs[row] = -equalities_[row].constant;
  }

  // Consecutive orthant blocks are merged; slack rows s = expr = h - G y.
  Index m = 0;
  for (const auto& block : cones_) m += block.cone.dim;
  program.cone_lhs = Eigen::MatrixXd::Zero(m, n);
  program.cone_rhs = Eigen::VectorXd::Zero(m);
  Index row = 0;
  for (const auto& block : cones_) {
    if (block.cone.kind == Cone::Kind::NonnegativeOrthant && !program.cone_layout.empty() &&
        program.cone_layout.back().kind == Cone::Kind::NonnegativeOrthant) {
      program.cone_layout.back().dim += block.cone.dim;
    } else {
      program.cone_layout.push_back(block.cone);
    }
    for (const auto& expr : block.rows) {
      for (const auto& [index, coef] : expr.terms) {
        check(index);
        program.cone_lhs(row, index) -= coef;
      }
      program.cone_rhs[row] = expr.constant;
      ++row;
    }
  }
  return program;
}

}  // namespace auxsig::conic
