#pragma once

// Dense bounded-variable primal simplex for the small LPs in this library.
//
//   min c'x   s.t.  A x = b,  lower <= x <= upper   (bounds may be infinite)
//
// Two phases with artificial variables, Bland's rule throughout, and a dual
// feasibility certificate checked against a fresh factorization before an
// optimum is reported.

#include <limits>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace gridctrl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(eq_rhs.size()); }
};

struct LpOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  int max_iterations = 0;  // 0 = automatic cap from problem size
};

struct LpOptimal {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd duals;  // one per equality row
  int iterations = 0;
};
struct LpInfeasible {
  double phase1_objective = 0.0;
};
struct LpUnbounded {};
struct LpStalled {
  int iterations = 0;
};

using LpResult = std::variant<LpOptimal, LpInfeasible, LpUnbounded, LpStalled>;

LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

// Largest dual-feasibility violation of `duals` for `x`, measured on the
// reduced costs c - A'y against the bound each variable sits at.
double dual_infeasibility(const LpProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& duals, double bound_tol = 1e-7);
double primal_infeasibility(const LpProblem& problem, const Eigen::VectorXd& x);

// Incremental construction with ranged rows lo <= a'x <= hi. Ranged rows get
// a slack column; rows with lo == hi stay plain equalities.
class LpBuilder {
 public:
  using Terms = std::vector<std::pair<int, double>>;

  int add_variable(double lower, double upper, double cost);
  void add_row(const Terms& terms, double lo, double hi);
  void add_equality(const Terms& terms, double rhs) { add_row(terms, rhs, rhs); }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  LpProblem build() const;

 private:
  struct Row {
    Terms terms;
    double lo;
    double hi;
  };
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<Row> rows_;
};

}  // namespace gridctrl
