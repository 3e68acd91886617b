#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace auxsig::conic {

using Eigen::Index;

/// One block of the cone K. A second-order block of dimension d constrains
/// (u0, u1) with u0 >= ||u1||, where u0 is the leading entry.
struct Cone {
  enum class Kind { NonnegativeOrthant, SecondOrder };
  Kind kind;
  Index dim;

  static Cone orthant(Index dim) { return {Kind::NonnegativeOrthant, dim}; }
  static Cone second_order(Index dim) { return {Kind::SecondOrder, dim}; }
};

/// Standard-form cone program
///
///   minimize    c'y
///   subject to  E y = f
///               G y + s = h,   s in K = K_1 x ... x K_r
///
/// The dual, with multipliers w (equalities) and z (cone rows), is
///
///   maximize    -f'w - h'z
///   subject to  E'w + G'z + c = 0,   z in K.
struct ConicProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_lhs;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd cone_lhs;
  Eigen::VectorXd cone_rhs;
  std::vector<Cone> cone_layout;

  [[nodiscard]] Index num_variables() const { return objective.size(); }
  [[nodiscard]] Index num_equalities() const { return eq_rhs.size(); }
  [[nodiscard]] Index num_cone_rows() const { return cone_rhs.size(); }
};

/// Dimension and layout violations; empty when the program is well formed.
[[nodiscard]] std::vector<std::string> check_program(const ConicProgram& program);

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure };

[[nodiscard]] const char* to_string(SolveStatus status);

/// For Optimal, (primal, slacks, eq_duals, cone_duals) is a KKT point.
/// For PrimalInfeasible, (eq_duals, cone_duals) hold a Farkas certificate
/// normalized to f'w + h'z = -1. For DualInfeasible, (primal, slacks) hold an
/// improving ray normalized to c'y = -1.
struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd primal;
  Eigen::VectorXd slacks;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd cone_duals;
  double objective_value = 0.0;
  double dual_objective_value = 0.0;
  int iterations = 0;
};

inline constexpr double kDefaultTolerance = 1e-8;

struct SolverOptions {
  double tolerance = kDefaultTolerance;
  int max_iterations = 100;
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra correction. Dense linear algebra;
/// meant for programs with at most a few hundred variables. Reentrant.
///
/// Throws std::invalid_argument when check_program() reports violations.
[[nodiscard]] ConicSolution solve(const ConicProgram& program, const SolverOptions& options);

[[nodiscard]] inline ConicSolution solve(const ConicProgram& program,
                                         double tolerance = kDefaultTolerance) {
  return solve(program, SolverOptions{tolerance, 100});
}

// ---------------------------------------------------------------------------
// Program assembly

/// sum_i coef_i * y[index_i] + constant
struct AffineExpr {
  std::vector<std::pair<Index, double>> terms;
  double constant = 0.0;

  static AffineExpr variable(Index index, double coef = 1.0) { return {{{index, coef}}, 0.0}; }
  static AffineExpr constant_value(double value) { return {{}, value}; }

  AffineExpr& add(Index index, double coef) {
    terms.emplace_back(index, coef);
    return *this;
  }
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator*=(double scale);
  [[nodiscard]] double evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

[[nodiscard]] AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs);
[[nodiscard]] AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs);
[[nodiscard]] AffineExpr operator*(double scale, AffineExpr expr);

/// A cone block whose slack entries are affine in the program variables.
struct ConeRows {
  Cone cone;
  std::vector<AffineExpr> rows;
};

/// Rows of a rotated cone {4 a d >= ||v||^2, a >= 0, d >= 0} expressed as the
/// second-order block ||(v, a - d)|| <= a + d.
[[nodiscard]] ConeRows hyperbolic_cone(const AffineExpr& a, const AffineExpr& d,
                                       std::vector<AffineExpr> v);

/// Rows encoding 4 y[alpha] y[delta] >= ||y[v]||^2 with y[alpha], y[delta] >= 0:
/// one second-order block followed by a two-row orthant block.
/// Throws std::out_of_range when an index is outside [0, num_variables).
[[nodiscard]] std::vector<ConeRows> rewrite_hyperbolic(Index num_variables, Index alpha_index,
                                                       Index delta_index,
                                                       std::span<const Index> vector_indices);

/// True when the slack values of `block` at `y` lie in its cone (within `slack`).
[[nodiscard]] bool satisfied(const ConeRows& block, const Eigen::Ref<const Eigen::VectorXd>& y,
                             double slack = 0.0);

/// Incremental construction of a ConicProgram.
class ProgramBuilder {
 public:
  /// Reserves `count` consecutive variables, returns the first index.
  Index add_variables(Index count);
  [[nodiscard]] Index num_variables() const { return num_variables_; }

  void set_objective(Index index, double coef);
  void add_equality(AffineExpr expr);     // expr == 0
  void add_nonnegative(AffineExpr expr);  // expr >= 0
  void add_cone(ConeRows block);
  void add_cones(std::vector<ConeRows> blocks);

  [[nodiscard]] ConicProgram build() const;

 private:
  Index num_variables_ = 0;
  std::vector<std::pair<Index, double>> objective_;
  std::vector<AffineExpr> equalities_;
  std::vector<ConeRows> cones_;
};

// ---------------------------------------------------------------------------
// Cone primitives, exposed for tests.

namespace detail {

/// Largest step t >= 0 with u + t du in K (u interior); +inf when unbounded.
[[nodiscard]] double max_step(std::span<const Cone> layout, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& du);

/// Nesterov-Todd scaling W (symmetric, block diagonal) with W z = W^{-1} s.
struct NtScaling {
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_inv;
  Eigen::VectorXd lambda;
};

[[nodiscard]] NtScaling nt_scaling(std::span<const Cone> layout, const Eigen::VectorXd& s,
                                   const Eigen::VectorXd& z);

[[nodiscard]] Eigen::VectorXd jordan_product(std::span<const Cone> layout,
                                             const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Solves u o q = d for q.
[[nodiscard]] Eigen::VectorXd jordan_divide(std::span<const Cone> layout,
                                            const Eigen::VectorXd& u, const Eigen::VectorXd& d);

/// Most negative "distance" to the boundary: min_i u_i for orthants,
/// u0 - ||u1|| for second-order blocks.
[[nodiscard]] double interior_margin(std::span<const Cone> layout, const Eigen::VectorXd& u);

}  // namespace detail

}  // namespace auxsig::conic
