#include <doctest.h>

#include <random>

#include "gridctrl/place_lp.hpp"
#include "oracles.hpp"

using namespace gridctrl;

namespace {

PtdfMatrix<double> f10_ptdf() { return ptdf(oracle::fixture("fixture10.json")); }

// Total k=1 effort for a candidate: sum over single targets of |d_i / c_i|.
std::pair<double, int> scalar_effort(const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  double total = 0.0;
  int infeasible = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c(i)) <= 1e-9) {
      ++infeasible;
    } else {
      total += std::abs(d(i) / c(i));
    }
  }
  return {total, infeasible};
}

}  // namespace

TEST_CASE("strategies") {
  const Network net = oracle::fixture("fixture10.json");
  const auto p = ptdf(net);
  const Eigen::VectorXd c = delta_targets(net, p, DeltaStrategy::constant());
  const Eigen::VectorXd l = delta_targets(net, p, DeltaStrategy::proportional_limit());
  const Eigen::VectorXd x = delta_targets(net, p, DeltaStrategy::proportional_reactance());
  for (int r = 0; r < p.num_lines(); ++r) {
    CHECK(c(r) == 100.0);
    CHECK(l(r) == doctest::Approx(0.1 * *net.lines[r].limit));
    CHECK(x(r) == doctest::Approx(1000.0 * net.lines[r].reactance));
  }
  CHECK(parse_strategy("const").kind == DeltaStrategy::Kind::Constant);
  CHECK(parse_strategy("limit").kind == DeltaStrategy::Kind::ProportionalLimit);
  CHECK(parse_strategy("reactance").kind == DeltaStrategy::Kind::ProportionalReactance);
  CHECK_THROWS_AS(parse_strategy("sideways"), InputError);
  CHECK_THROWS_AS(delta_targets(oracle::fixture("triangle.json"), ptdf(oracle::fixture("triangle.json")), DeltaStrategy::proportional_limit()),
                  InputError);
}

TEST_CASE("single-link effort is a scalar division") {
  const auto p = f10_ptdf();
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(p.num_lines(), 10.0, 75.0);
  for (const auto& pr : all_pairs(p)) {
    const std::vector<BusPair> link{pr};
    const Eigen::VectorXd c = cv(p, pr).values;
    for (int r = 0; r < p.num_lines(); ++r) {
      const std::vector<int> target{r};
      const auto e = control_effort(p, link, target, d, kInf);
      if (std::abs(c(r)) > 1e-9) {
        REQUIRE(e.has_value());
        CHECK(*e == doctest::Approx(std::abs(d(r) / c(r))).epsilon(1e-9));
        // sign symmetry for one target
        CHECK(*control_effort(p, link, target, Eigen::VectorXd(-d), kInf) == doctest::Approx(*e).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("zero sensitivity means no solution") {
  PtdfMatrix<double> p;
  p.values = Eigen::MatrixXd::Zero(2, 3);
  p.values(0, 1) = 0.5;
  p.bus_ids = {1, 2, 3};
  p.line_ids = {1, 2};
  const std::vector<BusPair> link{{2, 3}};
  const std::vector<int> dead{1}, live{0};
  const Eigen::VectorXd d = Eigen::Vector2d(10.0, 10.0);
  CHECK_FALSE(control_effort(p, link, dead, d).has_value());
  CHECK(*control_effort(p, link, live, d) == doctest::Approx(20.0));
}

TEST_CASE("setpoint bound") {
  const auto p = f10_ptdf();
  const std::vector<BusPair> link{{4, 8}};
  const std::vector<int> target{2};
  const Eigen::VectorXd d = Eigen::VectorXd::Constant(p.num_lines(), 100.0);
  const double needed = *control_effort(p, link, target, d);
  CHECK(control_effort(p, link, target, d, needed * 1.01).has_value());
  CHECK_FALSE(control_effort(p, link, target, d, needed * 0.99).has_value());
}

TEST_CASE("effort is homogeneous in the targets") {
  const auto p = f10_ptdf();
  std::mt19937_64 rng(6);
  const auto pairs = all_pairs(p);
  const auto sets = combinations(p.num_lines(), 2);
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(p.num_lines(), 5.0, 40.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<BusPair> links{pairs[rng() % pairs.size()], pairs[rng() % pairs.size()]};
    const auto& set = sets[rng() % sets.size()];
    const auto base = control_effort(p, links, set, d);
    const auto scaled = control_effort(p, links, set, Eigen::VectorXd(3.5 * d));
    REQUIRE(base.has_value() == scaled.has_value());
    if (base) CHECK(*scaled == doctest::Approx(3.5 * *base).epsilon(1e-9));
  }
}

TEST_CASE("a duplicate link cannot steer two lines") {
  const Network net = oracle::fixture("fixture10.json");
  const auto p = ptdf(net);
  const auto sets = combinations(p.num_lines(), 2);
  for (const auto& pr : all_pairs(p)) {
    const std::vector<BusPair> twin{pr, pr};
    const Eigen::VectorXd c = cv(p, pr).values;
    for (const auto& strategy : {DeltaStrategy::proportional_limit(), DeltaStrategy::proportional_reactance(), DeltaStrategy::constant()}) {
      const Eigen::VectorXd d = delta_targets(net, p, strategy);
      for (const auto& set : sets) {
        const auto e = control_effort(p, twin, set, d);
        const int i = set[0], j = set[1];
        // both rows are multiples of the same scalar unknown, so only a
        // proportional pair of targets is reachable
        const bool consistent = std::abs(c(i) * d(j) - c(j) * d(i)) <= 1e-9 * (std::abs(d(i)) + std::abs(d(j)));
        CHECK(e.has_value() == consistent);
        if (strategy.kind != DeltaStrategy::Kind::Constant) CHECK_FALSE(e.has_value());
      }
    }
  }
}

TEST_CASE("first placement ranking matches the closed form") {
  const Network net = oracle::fixture("fixture10.json");
  const auto p = ptdf(net);
  for (const auto& strategy : {DeltaStrategy::constant(), DeltaStrategy::proportional_limit(), DeltaStrategy::proportional_reactance()}) {
    const Eigen::VectorXd d = delta_targets(net, p, strategy);
    const auto step = place_lp_next(net, p, {}, strategy);
    CHECK(step.lp_count == 45 * 14);
    REQUIRE(step.ranking.size() == 45);
    double prev = -1.0;
    for (const auto& row : step.ranking) {
      const auto [total, infeasible] = scalar_effort(cv(p, row.pair).values, d);
      CHECK(row.effort.total_effort == doctest::Approx(total).epsilon(1e-9));
      CHECK(row.effort.infeasible_sets == infeasible);
      CHECK(row.effort.lp_count == 14);
      CHECK(row.effort.total_effort >= prev);
      prev = row.effort.total_effort;
    }
    CHECK(step.chosen == step.ranking.front().pair);
  }
}

TEST_CASE("lp counts and ranking rules") {
  const Network net = oracle::fixture("fixture10.json");
  const auto p = ptdf(net);
  const auto result = place_lp(net, p, 2, DeltaStrategy::proportional_limit());
  REQUIRE(result.steps.size() == 2);
  const auto& step = result.steps[1];
  CHECK(step.lp_count == 4095);
  CHECK(step.ranking.size() == 45);

  // the already placed pair is still enumerated and is all-infeasible
  const BusPair first = result.steps[0].chosen;
  const auto placed = std::find_if(step.ranking.begin(), step.ranking.end(), [&](const EffortRow& r) { return r.pair == first; });
  REQUIRE(placed != step.ranking.end());
  CHECK(placed->all_infeasible());
  CHECK(placed == step.ranking.end() - 1);

  double worst = 0.0;
  for (const auto& row : step.ranking) {
    if (!row.all_infeasible()) worst = std::max(worst, row.effort.total_effort);
  }
  for (const auto& row : step.ranking) CHECK(row.relative_percent == doctest::Approx(100.0 * row.effort.total_effort / worst));
  CHECK(step.chosen != first);
  CHECK(step.chosen == step.ranking.front().pair);
}

TEST_CASE("combinations") {
  CHECK(combinations(14, 2).size() == 91);
  CHECK(combinations(14, 3).size() == 364);
  CHECK(combinations(3, 0).size() == 1);
  CHECK(combinations(2, 3).empty());
  const auto c = combinations(4, 2);
  CHECK(c.front() == std::vector<int>{0, 1});
  CHECK(c.back() == std::vector<int>{2, 3});
}

TEST_CASE("compare placements") {
  const std::vector<BusPair> a{{4, 8}, {1, 7}, {9, 10}}, b{{4, 8}, {1, 7}, {2, 3}}, none;
  const auto same = compare_placements(a, a);
  CHECK(std::all_of(same.begin(), same.end(), [](const ComparisonRow& r) { return r.agree; }));
  const auto diff = compare_placements(a, b);
  REQUIRE(diff.size() == 3);
  CHECK(diff[0].agree);
  CHECK(diff[1].agree);
  CHECK_FALSE(diff[2].agree);
  CHECK(diff[2].step == 3);
  CHECK(compare_placements(none, none).empty());
  const auto ragged = compare_placements(a, std::vector<BusPair>{{4, 8}});
  REQUIRE(ragged.size() == 3);
  CHECK_FALSE(ragged[1].lp_pair.has_value());
  CHECK_FALSE(ragged[1].agree);
}
