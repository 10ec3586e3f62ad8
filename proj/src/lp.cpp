#include "gridctrl/lp.hpp"

#include <algorithm>
#include <cmath>

#include "gridctrl/errors.hpp"

namespace gridctrl {

namespace {

enum class Status { Basic, AtLower, AtUpper, FreeZero };

class Simplex {
 public:
  Simplex(const LpProblem& p, const LpOptions& opt) : p_(p), opt_(opt), m_(p.num_rows()), n_(p.num_vars()), total_(n_ + m_) {
    lower_.resize(total_);
    upper_.resize(total_);
    lower_.head(n_) = p.lower;
    upper_.head(n_) = p.upper;
    lower_.tail(m_).setZero();
    upper_.tail(m_).setConstant(kInf);

    x_ = Eigen::VectorXd::Zero(total_);
    status_.assign(total_, Status::AtLower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_(j))) {
        x_(j) = lower_(j);
        status_[j] = Status::AtLower;
      } else if (std::isfinite(upper_(j))) {
        x_(j) = upper_(j);
        status_[j] = Status::AtUpper;
      } else {
        x_(j) = 0.0;
        status_[j] = Status::FreeZero;
      }
    }
    const Eigen::VectorXd residual = p.eq_rhs - p.eq_matrix * x_.head(n_);
    sign_ = Eigen::VectorXd::Ones(m_);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      if (residual(i) < 0.0) sign_(i) = -1.0;
      basis_[i] = n_ + i;
      status_[n_ + i] = Status::Basic;
      x_(n_ + i) = std::abs(residual(i));
    }
    scale_b_ = 1.0 + (m_ > 0 ? p.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 50 * (total_ + m_) + 1000;
    refactor();
  }

  LpResult run() {
    // Phase 1: minimise the sum of artificials.
    cost_ = Eigen::VectorXd::Zero(total_);
    cost_.tail(m_).setOnes();
    auto phase1 = iterate();
    if (phase1 == Outcome::Stalled) return LpStalled{iterations_};
    refactor();
    const double infeas = x_.tail(m_).sum();
    if (infeas > opt_.feasibility_tol * scale_b_) return LpInfeasible{infeas};

    // Phase 2: pin artificials to zero and optimise the real objective.
    for (int i = 0; i < m_; ++i) {
      upper_(n_ + i) = 0.0;
      if (status_[n_ + i] != Status::Basic) {
        x_(n_ + i) = 0.0;
        status_[n_ + i] = Status::AtLower;
      }
    }
    cost_ = Eigen::VectorXd::Zero(total_);
    cost_.head(n_) = p_.objective;
    refactor();

    for (int attempt = 0; attempt < 4; ++attempt) {
      auto outcome = iterate();
      if (outcome == Outcome::Stalled) return LpStalled{iterations_};
      if (outcome == Outcome::Unbounded) return LpUnbounded{};
      refactor();
      if (!has_entering()) break;
    }
    if (has_entering()) return LpStalled{iterations_};

    LpOptimal out;
    out.x = x_.head(n_);
    // Artificials may sit in the basis at zero; clamp the reported point
    // onto the bounds it is already within tolerance of.
    for (int j = 0; j < n_; ++j) out.x(j) = std::clamp(out.x(j), lower_(j), upper_(j));
    out.objective = p_.objective.dot(out.x);
    out.duals = duals();
    out.iterations = iterations_;
    return out;
  }

 private:
  enum class Outcome { Optimal, Unbounded, Stalled };

  Eigen::VectorXd column(int j) const {
    if (j < n_) return p_.eq_matrix.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    e(j - n_) = sign_(j - n_);
    return e;
  }

  Eigen::MatrixXd basis_matrix() const {
    Eigen::MatrixXd b(m_, m_);
    for (int i = 0; i < m_; ++i) b.col(i) = column(basis_[i]);
    return b;
  }

  // Rebuild the tableau and basic values from the original data.
  void refactor() {
    if (m_ == 0) {
      tableau_.resize(0, total_);
      return;
    }
    Eigen::MatrixXd full(m_, total_);
    full.leftCols(n_) = p_.eq_matrix;
    full.rightCols(m_) = sign_.asDiagonal();
    lu_.compute(basis_matrix());
    tableau_ = lu_.solve(full);
    Eigen::VectorXd rhs = p_.eq_rhs;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] != Status::Basic && x_(j) != 0.0) rhs -= full.col(j) * x_(j);
    }
    const Eigen::VectorXd xb = lu_.solve(rhs);
    for (int i = 0; i < m_; ++i) x_(basis_[i]) = xb(i);
    pivots_since_refactor_ = 0;
  }

  Eigen::VectorXd duals() const {
    if (m_ == 0) return {};
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_(basis_[i]);
    return lu_.transpose().solve(cb);
  }

  double reduced_cost(int j) const {
    double d = cost_(j);
    for (int i = 0; i < m_; ++i) d -= cost_(basis_[i]) * tableau_(i, j);
    return d;
  }

  double cost_scale() const { return 1.0 + cost_.cwiseAbs().maxCoeff(); }

  // Entering candidate per Bland: lowest index with an improving direction.
  int choose_entering(int& direction) const {
    const double tol = 1e-9 * cost_scale();
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == Status::Basic) continue;
      if (lower_(j) == upper_(j)) continue;
      const double d = reduced_cost(j);
      const bool can_up = status_[j] != Status::AtUpper && x_(j) < upper_(j);
      const bool can_down = status_[j] != Status::AtLower && x_(j) > lower_(j);
      if (d < -tol && can_up) {
        direction = 1;
        return j;
      }
      if (d > tol && can_down) {
        direction = -1;
        return j;
      }
    }
    return -1;
  }

  bool has_entering() const {
    const double tol = opt_.optimality_tol * cost_scale();
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == Status::Basic || lower_(j) == upper_(j)) continue;
      const double d = reduced_cost(j);
      const bool can_up = status_[j] != Status::AtUpper && x_(j) < upper_(j);
      const bool can_down = status_[j] != Status::AtLower && x_(j) > lower_(j);
      if ((d < -tol && can_up) || (d > tol && can_down)) return true;
    }
    return false;
  }

  Outcome iterate() {
    while (true) {
      if (iterations_ >= max_iter_) return Outcome::Stalled;
      int dir = 0;
      const int enter = choose_entering(dir);
      if (enter < 0) return Outcome::Optimal;
      ++iterations_;

      double theta = (std::isfinite(lower_(enter)) && std::isfinite(upper_(enter))) ? upper_(enter) - lower_(enter) : kInf;
      int leave = -1;
      bool leave_to_lower = true;
      for (int i = 0; i < m_; ++i) {
        const double a = dir * tableau_(i, enter);
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const int b = basis_[i];
        double limit;
        bool to_lower;
        if (a > 0.0) {
          if (!std::isfinite(lower_(b))) continue;
          limit = (x_(b) - lower_(b)) / a;
          to_lower = true;
        } else {
          if (!std::isfinite(upper_(b))) continue;
          limit = (upper_(b) - x_(b)) / -a;
          to_lower = false;
        }
        limit = std::max(limit, 0.0);
        if (limit < theta || (limit == theta && leave >= 0 && b < basis_[leave])) {
          theta = limit;
          leave = i;
          leave_to_lower = to_lower;
        }
      }
      if (!std::isfinite(theta)) return Outcome::Unbounded;

      for (int i = 0; i < m_; ++i) x_(basis_[i]) -= dir * theta * tableau_(i, enter);
      x_(enter) += dir * theta;

      if (leave < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        status_[enter] = dir > 0 ? Status::AtUpper : Status::AtLower;
        x_(enter) = dir > 0 ? upper_(enter) : lower_(enter);
        continue;
      }

      const int out = basis_[leave];
      x_(out) = leave_to_lower ? lower_(out) : upper_(out);
      status_[out] = leave_to_lower ? Status::AtLower : Status::AtUpper;
      basis_[leave] = enter;
      status_[enter] = Status::Basic;

      const double pivot = tableau_(leave, enter);
      tableau_.row(leave) /= pivot;
      for (int i = 0; i < m_; ++i) {
        if (i == leave) continue;
        const double f = tableau_(i, enter);
        if (f != 0.0) tableau_.row(i) -= f * tableau_.row(leave);
      }
      if (++pivots_since_refactor_ >= 64) refactor();
    }
  }

  const LpProblem& p_;
  LpOptions opt_;
  int m_;
  int n_;
  int total_;
  Eigen::VectorXd lower_, upper_, cost_, x_, sign_;
  std::vector<Status> status_;
  std::vector<int> basis_;
  Eigen::MatrixXd tableau_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double scale_b_ = 1.0;
  int iterations_ = 0;
  int max_iter_ = 0;
  int pivots_since_refactor_ = 0;
};

void check_problem(const LpProblem& p) {
  const auto n = p.objective.size();
  if (p.lower.size() != n || p.upper.size() != n) throw InputError("LP bounds do not match the variable count");
  if (p.eq_matrix.rows() != p.eq_rhs.size() || (p.eq_matrix.rows() > 0 && p.eq_matrix.cols() != n)) {
    throw InputError("LP constraint matrix dimensions are inconsistent");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (p.lower(j) > p.upper(j)) throw InputError("LP variable has lower bound above upper bound");
    if (p.lower(j) == kInf || p.upper(j) == -kInf) throw InputError("LP variable bound is infinite on the wrong side");
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  check_problem(problem);
  LpProblem p = problem;
  if (p.eq_matrix.rows() == 0) p.eq_matrix.resize(0, p.num_vars());
  Simplex simplex(p, options);
  LpResult result = simplex.run();
  if (auto* opt = std::get_if<LpOptimal>(&result)) {
    const double cscale = 1.0 + p.objective.cwiseAbs().maxCoeff();
    const double pinf = primal_infeasibility(p, opt->x);
    const double dinf = dual_infeasibility(p, opt->x, opt->duals, options.feasibility_tol * 10);
    if (pinf > options.feasibility_tol * (1.0 + (p.num_rows() ? p.eq_rhs.cwiseAbs().maxCoeff() : 0.0)) || dinf > options.optimality_tol * cscale) {
      return LpStalled{opt->iterations};
    }
  }
  return result;
}

double primal_infeasibility(const LpProblem& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  if (p.num_rows() > 0) worst = (p.eq_matrix * x - p.eq_rhs).cwiseAbs().maxCoeff();
  for (int j = 0; j < p.num_vars(); ++j) {
    worst = std::max({worst, p.lower(j) - x(j), x(j) - p.upper(j)});
  }
  return worst;
}

double dual_infeasibility(const LpProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& duals, double bound_tol) {
  Eigen::VectorXd reduced = p.objective;
  if (p.num_rows() > 0) reduced -= p.eq_matrix.transpose() * duals;
  double worst = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    const bool at_lower = std::isfinite(p.lower(j)) && x(j) <= p.lower(j) + bound_tol;
    const bool at_upper = std::isfinite(p.upper(j)) && x(j) >= p.upper(j) - bound_tol;
    const double d = reduced(j);
    if (at_lower && at_upper) continue;
    if (at_lower) {
      worst = std::max(worst, -d);
    } else if (at_upper) {
      worst = std::max(worst, d);
    } else {
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

int LpBuilder::add_variable(double lower, double upper, double cost) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

void LpBuilder::add_row(const Terms& terms, double lo, double hi) {
  if (lo > hi) throw InputError("LP row has lo > hi");
  rows_.push_back({terms, lo, hi});
}

LpProblem LpBuilder::build() const {
  int slacks = 0;
  for (const auto& row : rows_) slacks += row.lo == row.hi ? 0 : 1;
  const int n = num_variables() + slacks;
  const int m = num_rows();
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(n);
  p.lower = Eigen::VectorXd::Zero(n);
  p.upper = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < num_variables(); ++j) {
    p.objective(j) = cost_[j];
    p.lower(j) = lower_[j];
    p.upper(j) = upper_[j];
  }
  p.eq_matrix = Eigen::MatrixXd::Zero(m, n);
  p.eq_rhs = Eigen::VectorXd::Zero(m);
  int slack = num_variables();
  for (int i = 0; i < m; ++i) {
    const Row& row = rows_[i];
    for (const auto& [j, v] : row.terms) p.eq_matrix(i, j) += v;
    if (row.lo == row.hi) {
      p.eq_rhs(i) = row.lo;
    } else {
      // a'x - s = 0 with lo <= s <= hi
      p.eq_matrix(i, slack) = -1.0;
      p.lower(slack) = row.lo;
      p.upper(slack) = row.hi;
      ++slack;
    }
  }
  return p;
}

}  // namespace gridctrl
