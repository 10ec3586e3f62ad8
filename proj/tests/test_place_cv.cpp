#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "gridctrl/place_cv.hpp"
#include "oracles.hpp"

using namespace gridctrl;

namespace {

// Orthant volumes summed in linear space from explicit simplex
// determinants. Generators are taken as given (no deduplication).
double direct_orthant_volume(const std::vector<Eigen::VectorXd>& gens) {
  const auto n = gens.front().size();
  const int k = static_cast<int>(gens.size());
  std::map<std::vector<int>, Eigen::VectorXd> ext;
  int combos = 1;
  for (int i = 0; i < k; ++i) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    int c = code;
    bool any = false;
    for (int i = 0; i < k; ++i, c /= 3) {
      const int coef = c % 3 - 1;
      if (coef != 0) any = true;
      col += coef * gens[i];
    }
    if (!any || col.cwiseAbs().maxCoeff() == 0.0) continue;
    std::vector<int> sign(n);
    for (Eigen::Index i = 0; i < n; ++i) sign[i] = col(i) < 0 ? -1 : 1;
    auto [it, fresh] = ext.try_emplace(sign, Eigen::VectorXd::Zero(n));
    it->second = it->second.cwiseMax(col.cwiseAbs());
  }
  double total = 0.0;
  for (const auto& [sign, e] : ext) total += oracle::diagonal_simplex_volume(e);
  return total;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// cos(phi) through the normal equations, as written with P_A = A (A^T A)^-1 A^T
double cos_normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd proj = a * gram.ldlt().solve(a.transpose() * v);
  return proj.norm() / v.norm();
}

}  // namespace

TEST_CASE("conical log volume") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  CHECK(conical_log_volume(ones).log_volume == 0.0);
  CHECK(conical_log_volume(ones).dimension == 5);

  const Eigen::Vector3d v(2.0, 1.0, 1.0);
  const auto s = conical_log_volume(v);
  CHECK(s.log_volume == doctest::Approx(std::log(2.0)));
  CHECK(oracle::diagonal_simplex_volume(v) == doctest::Approx(2.0 / 6.0));
  CHECK(std::exp(s.log_volume) / factorial(3) == doctest::Approx(oracle::diagonal_simplex_volume(v)));

  const Eigen::Vector3d flat(5.0, 0.0, 7.0);
  const auto d = conical_log_volume(flat);
  CHECK(d.dimension == 2);
  CHECK(d < conical_log_volume(Eigen::Vector3d(1e-3, 1e-3, 1e-3)));  // dimension dominates
}

TEST_CASE("conical log volume is monotone") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(6, [&] { return u(rng) * (rng() % 2 ? 1.0 : -1.0); });
    const auto before = conical_log_volume(v);
    const auto i = static_cast<Eigen::Index>(rng() % 6);
    v(i) *= 1.0 + u(rng);
    CHECK(conical_log_volume(v) > before);
  }
}

TEST_CASE("3-line toy systems against simplex determinants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const auto sa = conical_log_volume(a), sb = conical_log_volume(b);
    const double va = oracle::diagonal_simplex_volume(a.cwiseAbs()), vb = oracle::diagonal_simplex_volume(b.cwiseAbs());
    CHECK((sa < sb) == (va < vb));
    CHECK(std::exp(sa.log_volume - sb.log_volume) == doctest::Approx(va / vb).epsilon(1e-9));

    // orthant sums, one selected vector plus a candidate
    const std::vector<Eigen::VectorXd> sel{a};
    const auto score = orthant_volume_sum<double>(sel, Eigen::VectorXd(b));
    REQUIRE(score.dimension == 3);
    CHECK(std::exp(score.log_volume) / factorial(3) == doctest::Approx(direct_orthant_volume({a, b})).epsilon(1e-9));
  }
}

TEST_CASE("orthant volume sum examples") {
  const Eigen::VectorXd e1 = Eigen::Vector2d(1.0, 0.0), e2 = Eigen::Vector2d(0.0, 1.0);
  const std::vector<Eigen::VectorXd> sel{e1};
  const auto s = orthant_volume_sum<double>(sel, e2);
  CHECK(s.dimension == 2);
  CHECK(s.log_volume == doctest::Approx(std::log(4.0)));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
    const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
    const std::vector<Eigen::VectorXd> one{a}, two{a, b};
    // duplicate and negated duplicate add nothing
    const auto alone = orthant_volume_sum<double>(one, a);
    CHECK(std::exp(alone.log_volume) / factorial(4) == doctest::Approx(direct_orthant_volume({a})).epsilon(1e-9));
    CHECK(orthant_volume_sum<double>(one, Eigen::VectorXd(-a)).log_volume == doctest::Approx(alone.log_volume));
    const auto pair = orthant_volume_sum<double>(one, b);
    CHECK(orthant_volume_sum<double>(two, b).log_volume == doctest::Approx(pair.log_volume));
    // sign closure
    CHECK(orthant_volume_sum<double>(two, Eigen::VectorXd(-c)).log_volume == doctest::Approx(orthant_volume_sum<double>(two, c).log_volume));
    CHECK(std::exp(orthant_volume_sum<double>(two, c).log_volume) / factorial(4) ==
          doctest::Approx(direct_orthant_volume({a, b, c})).epsilon(1e-9));
  }
}

TEST_CASE("orthogonality") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 1);
  a(0, 0) = 1.0;
  CHECK(orthogonality<double>(a, Eigen::Vector4d(3.0, 0.0, 0.0, 0.0)) == doctest::Approx(1.0));
  CHECK(orthogonality<double>(a, Eigen::Vector4d(0.0, 1.0, 2.0, 0.0)) == doctest::Approx(0.0));
  CHECK(orthogonality<double>(a, Eigen::Vector4d(1.0, 1.0, 0.0, 0.0) / std::sqrt(2.0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(orthogonality<double>(a, Eigen::Vector4d::Zero()), InputError);
  Eigen::MatrixXd deficient(4, 2);
  deficient << a, 2.0 * a;
  CHECK_THROWS_AS(orthogonality<double>(deficient, Eigen::Vector4d::Ones()), InputError);

  const auto p = ptdf(oracle::fixture("fixture10.json"));
  Eigen::MatrixXd basis(p.num_lines(), 2);
  basis << cv(p, 4, 8).values, cv(p, 1, 7).values;
  for (const auto& pr : all_pairs(p)) {
    const Eigen::VectorXd v = cv(p, pr).values;
    CHECK(orthogonality<double>(basis, v) == doctest::Approx(std::min(1.0, cos_normal_equations(basis, v))).epsilon(1e-9));
  }
}

TEST_CASE("first pick is the exhaustive argmax") {
  for (const char* name : {"triangle.json", "fixture10.json", "case14.m"}) {
    CAPTURE(name);
    const auto p = ptdf(oracle::fixture(name));
    BusPair best{};
    int best_dim = -1;
    long double best_vol = -1.0L;
    for (const auto& pr : all_pairs(p)) {
      const Eigen::VectorXd v = cv(p, pr).values;
      int dim = 0;
      long double vol = 1.0L;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const long double a = std::abs(static_cast<long double>(v(i)));
        dim += a > 1e-9L;
        vol *= std::max(a, 1e-9L);
      }
      if (dim > best_dim || (dim == best_dim && vol > best_vol)) {
        best = pr;
        best_dim = dim;
        best_vol = vol;
      }
    }
    const auto ranked = first_placement(p);
    CHECK(ranked.front().pair == best);
    CHECK(place_cv(p, 1).placements().front() == best);
  }
}

TEST_CASE("two-bus network") {
  Network net;
  net.buses = {{1, true}, {2, false}};
  net.lines = {{1, 1, 2, 0.1, std::nullopt, true}};
  const auto r = first_placement(ptdf(net));
  REQUIRE(r.size() == 1);
  CHECK(r.front().pair == BusPair{1, 2});
}

TEST_CASE("next placements maximise the orthant volume over the filtered set") {
  const auto p = ptdf(oracle::fixture("fixture10.json"));
  PlacementState state;
  place_first(state, p);
  for (int step = 2; step <= 9; ++step) {
    CAPTURE(step);
    // independent candidate filter
    std::vector<std::pair<double, BusPair>> cands;
    for (const auto& pr : all_pairs(p)) {
      if (std::find(state.selected.begin(), state.selected.end(), pr) != state.selected.end()) continue;
      const Eigen::VectorXd v = cv(p, pr).values;
      Eigen::MatrixXd grown(state.basis.rows(), state.basis.cols() + 1);
      grown << state.basis, v;
      if (numerical_rank(grown) <= state.basis.cols()) continue;
      cands.push_back({cos_normal_equations(state.basis, v), pr});
    }
    std::sort(cands.begin(), cands.end());
    std::vector<BusPair> filtered;
    for (const auto& [c, pr] : cands) {
      if (c <= state.cos_threshold) filtered.push_back(pr);
    }
    if (filtered.empty()) {
      for (const auto& [c, pr] : cands) filtered.push_back(pr);
    }
    if (filtered.size() > 10) filtered.resize(10);

    std::vector<Eigen::VectorXd> sel;
    for (const auto& pr : state.selected) sel.push_back(cv(p, pr).values);
    BusPair best{};
    VolumeScore best_score;
    bool first = true;
    for (const auto& pr : filtered) {
      const auto s = orthant_volume_sum<double>(sel, cv(p, pr).values);
      if (first || s > best_score || (!(best_score > s) && pr < best)) {
        best = pr;
        best_score = s;
        first = false;
      }
    }

    const auto before = state.selected;
    const auto result = place_next(state, p);
    CHECK(result.table.size() == filtered.size());
    CHECK(result.chosen == best);
    CHECK(std::find(before.begin(), before.end(), result.chosen) == before.end());
    CHECK(numerical_rank(state.basis) == state.basis.cols());
  }
  CHECK_THROWS_AS(place_next(state, p), InputError);
}

TEST_CASE("only the candidates under the threshold are scored") {
  const auto p = ptdf(oracle::fixture("fixture10.json"));
  PlacementState probe;
  place_first(probe, p);
  place_next(probe, p);
  // cos values at step three, from the full (uncapped, unfiltered) pool
  PlacementState wide = probe;
  wide.cos_threshold = 1.0;
  wide.candidate_cap = 1000;
  auto table = place_next(wide, p).table;
  std::vector<double> cosines;
  for (const auto& row : table) cosines.push_back(*row.cosphi);
  std::sort(cosines.begin(), cosines.end());
  REQUIRE(cosines.size() > 3);

  PlacementState narrow = probe;
  narrow.cos_threshold = 0.5 * (cosines[1] + cosines[2]);
  const auto step = place_next(narrow, p);
  CHECK(step.table.size() == 2);
  for (const auto& row : step.table) CHECK(*row.cosphi <= narrow.cos_threshold);
}

TEST_CASE("norm-1 ranking") {
  const Network net = oracle::fixture("fixture10.json");
  const auto p = ptdf(net);
  const auto r = rank_by_norm1(p);
  CHECK(r.size() == 45);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].norm1 >= r[i].norm1);
  for (const auto& row : r) CHECK(row.norm1 > 0.0);

  // relabel buses id -> 11 - id; the norms travel with the pairs
  Network relabeled = net;
  for (auto& b : relabeled.buses) b.id = 11 - b.id;
  for (auto& l : relabeled.lines) {
    l.from_bus = 11 - l.from_bus;
    l.to_bus = 11 - l.to_bus;
  }
  const auto r2 = rank_by_norm1(ptdf(relabeled));
  std::map<BusPair, double> by_pair;
  for (const auto& row : r2) by_pair[row.pair] = row.norm1;
  for (const auto& row : r) {
    const BusPair mapped{std::min(11 - row.pair.m, 11 - row.pair.n), std::max(11 - row.pair.m, 11 - row.pair.n)};
    CHECK(by_pair.at(mapped) == doctest::Approx(row.norm1).epsilon(1e-12));
  }
}

TEST_CASE("metric comparison") {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(a, c) == doctest::Approx(-1.0));
  const std::vector<double> ties{1, 1, 2, 2};
  CHECK(spearman(ties, a) == doctest::Approx(0.894427191).epsilon(1e-8));

  const auto m = compare_metrics(ptdf(oracle::fixture("fixture10.json")));
  CHECK(m.pairs.size() == 45);
  CHECK(m.rho > 0.5);
}

TEST_CASE("place_cv bookkeeping") {
  const auto p = ptdf(oracle::fixture("fixture10.json"));
  CHECK(place_cv(p, 0).steps.empty());
  const auto r = place_cv(p, 4);
  CHECK(r.placements().size() == 4);
  CHECK_FALSE(r.steps[0].table.front().cosphi.has_value());
  CHECK(r.steps[1].table.front().cosphi.has_value());
  for (const auto& s : r.steps) CHECK(std::count_if(s.table.begin(), s.table.end(), [](const CandidateRow& row) { return row.selected; }) == 1);
  CHECK_THROWS_AS(place_cv(p, 10), InputError);
  CHECK_THROWS_AS(place_cv(p, -1), InputError);
}
