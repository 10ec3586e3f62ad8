#include <doctest.h>

#include <random>

#include "gridctrl/lp.hpp"
#include "oracles.hpp"

using namespace gridctrl;

namespace {

LpOptimal require_optimal(const LpResult& r) {
  REQUIRE(std::holds_alternative<LpOptimal>(r));
  return std::get<LpOptimal>(r);
}

}  // namespace

TEST_CASE("absolute value gadget") {
  // min t  s.t. x = 5, x - t <= 0, -x - t <= 0
  LpBuilder b;
  const int x = b.add_variable(-kInf, kInf, 0.0);
  const int t = b.add_variable(0.0, kInf, 1.0);
  b.add_equality({{x, 1.0}}, 5.0);
  b.add_row({{x, 1.0}, {t, -1.0}}, -kInf, 0.0);
  b.add_row({{x, -1.0}, {t, -1.0}}, -kInf, 0.0);
  const auto opt = require_optimal(solve_lp(b.build()));
  CHECK(opt.objective == doctest::Approx(5.0));
  CHECK(opt.x(x) == doctest::Approx(5.0));

  LpBuilder neg;
  const int y = neg.add_variable(-kInf, kInf, 0.0);
  const int s = neg.add_variable(0.0, kInf, 1.0);
  neg.add_equality({{y, 2.0}}, -7.0);
  neg.add_row({{y, 1.0}, {s, -1.0}}, -kInf, 0.0);
  neg.add_row({{y, -1.0}, {s, -1.0}}, -kInf, 0.0);
  CHECK(require_optimal(solve_lp(neg.build())).objective == doctest::Approx(3.5));
}

TEST_CASE("infeasible and unbounded") {
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(1);
  p.eq_matrix = Eigen::MatrixXd::Zero(1, 1);
  p.eq_rhs = Eigen::VectorXd::Ones(1);
  p.lower = Eigen::VectorXd::Constant(1, -kInf);
  p.upper = Eigen::VectorXd::Constant(1, kInf);
  CHECK(std::holds_alternative<LpInfeasible>(solve_lp(p)));

  LpProblem u;
  u.objective = Eigen::VectorXd::Constant(1, -1.0);
  u.eq_matrix = Eigen::MatrixXd::Zero(0, 1);
  u.eq_rhs = Eigen::VectorXd::Zero(0);
  u.lower = Eigen::VectorXd::Zero(1);
  u.upper = Eigen::VectorXd::Constant(1, kInf);
  CHECK(std::holds_alternative<LpUnbounded>(solve_lp(u)));

  // bounds alone contradict the row
  LpBuilder b;
  const int x = b.add_variable(0.0, 1.0, 1.0);
  const int y = b.add_variable(0.0, 1.0, 1.0);
  b.add_equality({{x, 1.0}, {y, 1.0}}, 3.0);
  CHECK(std::holds_alternative<LpInfeasible>(solve_lp(b.build())));
}

TEST_CASE("no rows: every variable sits at its cheaper bound") {
  LpProblem p;
  p.objective = Eigen::Vector3d(1.0, -2.0, 0.0);
  p.eq_matrix = Eigen::MatrixXd::Zero(0, 3);
  p.eq_rhs = Eigen::VectorXd::Zero(0);
  p.lower = Eigen::Vector3d(-1.0, -1.0, -1.0);
  p.upper = Eigen::Vector3d(2.0, 2.0, 2.0);
  const auto opt = require_optimal(solve_lp(p));
  CHECK(opt.objective == doctest::Approx(-5.0));
}

TEST_CASE("random LPs against vertex enumeration") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = static_cast<int>(rng() % std::min(n, 4));
    LpProblem p;
    p.objective = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
    p.eq_matrix = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return u(rng); });
    p.lower = Eigen::VectorXd::NullaryExpr(n, [&] { return -1.0 - 2.0 * std::abs(u(rng)); });
    p.upper = Eigen::VectorXd::NullaryExpr(n, [&] { return 1.0 + 2.0 * std::abs(u(rng)); });
    // half the time feasible by construction, otherwise anything goes
    if (trial % 2 == 0) {
      const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.9 * u(rng); });
      p.eq_rhs = p.eq_matrix * x0;
    } else {
      p.eq_rhs = Eigen::VectorXd::NullaryExpr(m, [&] { return 4.0 * u(rng); });
    }
    const auto expected = oracle::vertex_enumeration(p);
    const auto result = solve_lp(p);
    CAPTURE(trial);
    if (expected) {
      const auto opt = require_optimal(result);
      CHECK(opt.objective == doctest::Approx(*expected).epsilon(1e-6).scale(1.0));
      CHECK(primal_infeasibility(p, opt.x) <= 1e-7);
      CHECK(dual_infeasibility(p, opt.x, opt.duals) <= 1e-7);
      ++checked;
    } else {
      CHECK(std::holds_alternative<LpInfeasible>(result));
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("ranged rows through the builder") {
  // max x + y  s.t. 1 <= x + 2y <= 4, x - y in [-1, 1], x, y >= 0
  LpBuilder b;
  const int x = b.add_variable(0.0, kInf, -1.0);
  const int y = b.add_variable(0.0, kInf, -1.0);
  b.add_row({{x, 1.0}, {y, 2.0}}, 1.0, 4.0);
  b.add_row({{x, 1.0}, {y, -1.0}}, -1.0, 1.0);
  const LpProblem p = b.build();
  const auto opt = require_optimal(solve_lp(p));
  // vertices: x - y = 1 and x + 2y = 4 -> (2, 1)
  CHECK(opt.x(x) == doctest::Approx(2.0));
  CHECK(opt.x(y) == doctest::Approx(1.0));
  CHECK(opt.objective == doctest::Approx(-3.0));
}

TEST_CASE("degenerate problem that cycles without an anti-cycling rule") {
  // Beale's example in equality form with slacks
  LpBuilder b;
  const int x1 = b.add_variable(0.0, kInf, -0.75);
  const int x2 = b.add_variable(0.0, kInf, 150.0);
  const int x3 = b.add_variable(0.0, kInf, -0.02);
  const int x4 = b.add_variable(0.0, kInf, 6.0);
  b.add_row({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, -kInf, 0.0);
  b.add_row({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, -kInf, 0.0);
  b.add_row({{x3, 1.0}}, -kInf, 1.0);
  const auto opt = require_optimal(solve_lp(b.build()));
  CHECK(opt.objective == doctest::Approx(-0.05));
}

TEST_CASE("iteration cap reports stalled") {
  LpBuilder b;
  std::vector<int> v;
  for (int i = 0; i < 6; ++i) v.push_back(b.add_variable(0.0, 10.0, -1.0 - i));
  LpBuilder::Terms all;
  for (int i : v) all.emplace_back(i, 1.0);
  b.add_row(all, -kInf, 7.0);
  LpOptions opt;
  opt.max_iterations = 1;
  CHECK(std::holds_alternative<LpStalled>(solve_lp(b.build(), opt)));
  CHECK(std::holds_alternative<LpOptimal>(solve_lp(b.build())));
}

TEST_CASE("redundant equality rows") {
  LpBuilder b;
  const int x = b.add_variable(0.0, 5.0, 1.0);
  const int y = b.add_variable(0.0, 5.0, 2.0);
  b.add_equality({{x, 1.0}, {y, 1.0}}, 3.0);
  b.add_equality({{x, 2.0}, {y, 2.0}}, 6.0);
  const auto opt = require_optimal(solve_lp(b.build()));
  CHECK(opt.objective == doctest::Approx(3.0));
}
