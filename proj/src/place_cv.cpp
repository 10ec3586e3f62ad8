#include "gridctrl/place_cv.hpp"

#include <numeric>

#include "gridctrl/parallel.hpp"

namespace gridctrl {

namespace {

bool better(const ScoredPair& a, const ScoredPair& b) {
  if (a.score > b.score) return true;
  if (b.score > a.score) return false;
  return a.pair < b.pair;
}

template <typename T, typename Less>
std::vector<double> average_ranks(const std::vector<T>& values, Less less) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return less(values[a], values[b]); });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && !less(values[order[i]], values[order[j]]) && !less(values[order[j]], values[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::vector<ScoredPair> first_placement(const PtdfMatrix<double>& ptdf, double eps) {
  const auto pairs = all_pairs(ptdf);
  auto scored = parallel_map(pairs.size(), [&](std::size_t i) {
    return ScoredPair{pairs[i], conical_log_volume(cv(ptdf, pairs[i]).values, eps)};
  });
  std::sort(scored.begin(), scored.end(), better);
  return scored;
}

PlacementStep place_first(PlacementState& state, const PtdfMatrix<double>& ptdf) {
  if (!state.selected.empty()) throw InputError("place_first called on a non-empty placement state");
  auto ranked = first_placement(ptdf, state.epsilon);
  if (ranked.empty()) throw InputError("network has fewer than two buses");
  PlacementStep step;
  step.chosen = ranked.front().pair;
  for (std::size_t i = 0; i < ranked.size(); ++i) step.table.push_back({ranked[i].pair, std::nullopt, ranked[i].score, i == 0});
  state.selected.push_back(step.chosen);
  state.basis = cv(ptdf, step.chosen).values;
  return step;
}

PlacementStep place_next(PlacementState& state, const PtdfMatrix<double>& ptdf) {
  if (state.selected.empty()) return place_first(state, ptdf);

  struct Candidate {
    BusPair pair;
    double cosphi;
    Eigen::VectorXd values;
  };
  std::vector<Candidate> pool;
  const int rank_now = static_cast<int>(state.basis.cols());
  for (const auto& pair : all_pairs(ptdf)) {
    if (std::find(state.selected.begin(), state.selected.end(), pair) != state.selected.end()) continue;
    Eigen::VectorXd v = cv(ptdf, pair).values;
    if (!(v.norm() > 0.0)) continue;
    Eigen::MatrixXd grown(state.basis.rows(), rank_now + 1);
    grown << state.basis, v;
    if (numerical_rank(grown) <= rank_now) continue;  // adds no direction
    pool.push_back({pair, orthogonality<double>(state.basis, v), std::move(v)});
  }
  if (pool.empty()) throw InputError("no bus pair adds a new controllable direction");

  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cosphi != b.cosphi) return a.cosphi < b.cosphi;
    return a.pair < b.pair;
  });
  std::size_t keep = 0;
  while (keep < pool.size() && pool[keep].cosphi <= state.cos_threshold) ++keep;
  if (keep == 0) keep = pool.size();  // nothing under the threshold: fall back to the most orthogonal
  keep = std::min<std::size_t>(keep, static_cast<std::size_t>(std::max(state.candidate_cap, 1)));
  pool.resize(keep);

  std::vector<Eigen::VectorXd> chosen_cvs;
  for (Eigen::Index c = 0; c < state.basis.cols(); ++c) chosen_cvs.push_back(state.basis.col(c));
  auto scores = parallel_map(pool.size(), [&](std::size_t i) {
    return orthant_volume_sum<double>(chosen_cvs, pool[i].values, state.epsilon);
  });

  std::vector<CandidateRow> rows;
  for (std::size_t i = 0; i < pool.size(); ++i) rows.push_back({pool[i].pair, pool[i].cosphi, scores[i], false});
  std::sort(rows.begin(), rows.end(), [](const CandidateRow& a, const CandidateRow& b) {
    if (a.score > b.score) return true;
    if (b.score > a.score) return false;
    return a.pair < b.pair;
  });
  rows.front().selected = true;

  PlacementStep step{rows.front().pair, std::move(rows)};
  const Eigen::VectorXd v = cv(ptdf, step.chosen).values;
  Eigen::MatrixXd grown(state.basis.rows(), state.basis.cols() + 1);
  grown << state.basis, v;
  state.basis = std::move(grown);
  state.selected.push_back(step.chosen);
  return step;
}

CvPlacementResult place_cv(const PtdfMatrix<double>& ptdf, int count, const CvPlacementOptions& options) {
  if (count < 0) throw InputError("placement count must be non-negative");
  PlacementState state;
  state.cos_threshold = options.cos_threshold;
  state.candidate_cap = options.candidate_cap;
  state.epsilon = options.epsilon;
  CvPlacementResult result;
  for (int k = 0; k < count; ++k) result.steps.push_back(place_next(state, ptdf));
  return result;
}

std::vector<NormRank> rank_by_norm1(const PtdfMatrix<double>& ptdf) {
  std::vector<NormRank> out;
  for (const auto& pair : all_pairs(ptdf)) out.push_back({pair, cv(ptdf, pair).values.lpNorm<1>()});
  std::stable_sort(out.begin(), out.end(), [](const NormRank& a, const NormRank& b) { return a.norm1 > b.norm1; });
  return out;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("spearman: length mismatch");
  if (a.size() < 2) return 0.0;
  std::vector<double> va(a.begin(), a.end()), vb(b.begin(), b.end());
  auto lt = [](double x, double y) { return x < y; };
  return pearson(average_ranks(va, lt), average_ranks(vb, lt));
}

MetricComparison compare_metrics(const PtdfMatrix<double>& ptdf, double eps) {
  MetricComparison out;
  out.pairs = all_pairs(ptdf);
  for (const auto& pair : out.pairs) {
    const Eigen::VectorXd v = cv(ptdf, pair).values;
    out.norm1.push_back(v.lpNorm<1>());
    out.volume.push_back(conical_log_volume(v, eps));
  }
  auto vol_ranks = average_ranks(out.volume, [](const VolumeScore& x, const VolumeScore& y) { return x < y; });
  auto norm_ranks = average_ranks(out.norm1, [](double x, double y) { return x < y; });
  out.rho = pearson(norm_ranks, vol_ranks);
  return out;
}

}  // namespace gridctrl
