#include "gridctrl/place_lp.hpp"

#include <algorithm>

#include "gridctrl/parallel.hpp"

namespace gridctrl {

DeltaStrategy parse_strategy(std::string_view name) {
  if (name == "const") return DeltaStrategy::constant();
  if (name == "limit") return DeltaStrategy::proportional_limit();
  if (name == "reactance") return DeltaStrategy::proportional_reactance();
  throw InputError(fmt::format("unknown strategy '{}' (expected const, limit or reactance)", name));
}

std::string_view strategy_name(DeltaStrategy::Kind kind) {
  switch (kind) {
    case DeltaStrategy::Kind::Constant: return "const";
    case DeltaStrategy::Kind::ProportionalLimit: return "limit";
    case DeltaStrategy::Kind::ProportionalReactance: return "reactance";
  }
  return "?";
}

Eigen::VectorXd delta_targets(const Network& net, const PtdfMatrix<double>& ptdf, const DeltaStrategy& strategy) {
  if (!(strategy.parameter > 0.0)) throw InputError("strategy parameter must be positive");
  Eigen::VectorXd out(ptdf.num_lines());
  for (int r = 0; r < ptdf.num_lines(); ++r) {
    const Line& line = net.lines[net.line_index(ptdf.line_ids[r])];
    switch (strategy.kind) {
      case DeltaStrategy::Kind::Constant:
        out(r) = strategy.parameter;
        break;
      case DeltaStrategy::Kind::ProportionalLimit:
        if (!line.limit) throw InputError(fmt::format("line {} has no limit; the limit strategy needs one", line.id));
        out(r) = strategy.parameter * *line.limit;
        break;
      case DeltaStrategy::Kind::ProportionalReactance:
        out(r) = strategy.parameter * line.reactance;
        break;
    }
  }
  return out;
}

std::optional<double> control_effort(const PtdfMatrix<double>& ptdf, std::span<const BusPair> placements, std::span<const int> targets,
                                     const Eigen::VectorXd& delta, double p_dc_max) {
  if (placements.size() != targets.size()) throw InputError("control effort needs as many target lines as HVDC links");
  if (!(p_dc_max > 0.0)) throw InputError("p_dc_max must be positive");
  const int k = static_cast<int>(placements.size());
  const Eigen::MatrixXd cvs = cv_matrix(ptdf, placements);

  LpBuilder lp;
  std::vector<int> p(k), t(k);
  for (int j = 0; j < k; ++j) p[j] = lp.add_variable(-p_dc_max, p_dc_max, 0.0);
  for (int j = 0; j < k; ++j) t[j] = lp.add_variable(0.0, kInf, 1.0);
  for (int row : targets) {
    LpBuilder::Terms terms;
    for (int j = 0; j < k; ++j) terms.emplace_back(p[j], cvs(row, j));
    lp.add_equality(terms, delta(row));
  }
  for (int j = 0; j < k; ++j) {
    lp.add_row({{p[j], 1.0}, {t[j], -1.0}}, -kInf, 0.0);
    lp.add_row({{p[j], -1.0}, {t[j], -1.0}}, -kInf, 0.0);
  }
  const LpResult result = solve_lp(lp.build());
  if (const auto* opt = std::get_if<LpOptimal>(&result)) return opt->objective;
  if (std::holds_alternative<LpInfeasible>(result)) return std::nullopt;
  if (std::holds_alternative<LpStalled>(result)) throw std::runtime_error("control-effort LP stalled");
  throw std::runtime_error("control-effort LP reported unbounded");
}

std::optional<double> control_effort(const Network& net, const PtdfMatrix<double>& ptdf, std::span<const BusPair> placements,
                                     std::span<const int> target_line_ids, const DeltaStrategy& strategy, double p_dc_max) {
  std::vector<int> rows;
  for (int id : target_line_ids) rows.push_back(ptdf.row_of(id));
  std::vector<int> sorted = rows;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InputError("target lines must be distinct");
  return control_effort(ptdf, placements, rows, delta_targets(net, ptdf, strategy), p_dc_max);
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

LpPlacementStep place_lp_next(const Network& net, const PtdfMatrix<double>& ptdf, std::span<const BusPair> existing,
                              const DeltaStrategy& strategy, double p_dc_max) {
  const int k = static_cast<int>(existing.size()) + 1;
  if (k > ptdf.num_lines()) throw InputError("more HVDC links than lines to control");
  const auto pairs = all_pairs(ptdf);
  const auto sets = combinations(ptdf.num_lines(), k);
  const Eigen::VectorXd delta = delta_targets(net, ptdf, strategy);

  auto efforts = parallel_map(pairs.size(), [&](std::size_t c) {
    std::vector<BusPair> placement(existing.begin(), existing.end());
    placement.push_back(pairs[c]);
    EffortResult r;
    for (const auto& set : sets) {
      ++r.lp_count;
      if (auto e = control_effort(ptdf, placement, set, delta, p_dc_max)) {
        r.total_effort += *e;
      } else {
        ++r.infeasible_sets;
      }
    }
    return r;
  });

  LpPlacementStep step;
  step.existing.assign(existing.begin(), existing.end());
  double worst = 0.0;
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    step.ranking.push_back({pairs[c], efforts[c], 0.0});
    step.lp_count += efforts[c].lp_count;
    if (!step.ranking.back().all_infeasible()) worst = std::max(worst, efforts[c].total_effort);
  }
  for (auto& row : step.ranking) row.relative_percent = worst > 0.0 ? 100.0 * row.effort.total_effort / worst : 0.0;
  std::stable_sort(step.ranking.begin(), step.ranking.end(), [](const EffortRow& a, const EffortRow& b) {
    if (a.all_infeasible() != b.all_infeasible()) return !a.all_infeasible();
    return a.effort.total_effort < b.effort.total_effort;
  });

  auto placed = [&](const BusPair& p) { return std::find(existing.begin(), existing.end(), p) != existing.end(); };
  bool found = false;
  for (const auto& row : step.ranking) {
    if (placed(row.pair) || row.all_infeasible()) continue;
    step.chosen = row.pair;
    found = true;
    break;
  }
  if (!found) throw InfeasibleError("no bus pair yields a feasible control-effort set");
  return step;
}

LpPlacementResult place_lp(const Network& net, const PtdfMatrix<double>& ptdf, int count, const DeltaStrategy& strategy, double p_dc_max) {
  if (count < 0) throw InputError("placement count must be non-negative");
  LpPlacementResult result;
  std::vector<BusPair> existing;
  for (int k = 0; k < count; ++k) {
    result.steps.push_back(place_lp_next(net, ptdf, existing, strategy, p_dc_max));
    existing.push_back(result.steps.back().chosen);
  }
  return result;
}

std::vector<ComparisonRow> compare_placements(std::span<const BusPair> cv_sequence, std::span<const BusPair> lp_sequence) {
  auto canonical = [](BusPair p) { return p.m <= p.n ? p : BusPair{p.n, p.m}; };
  std::vector<ComparisonRow> out;
  const std::size_t n = std::max(cv_sequence.size(), lp_sequence.size());
  for (std::size_t i = 0; i < n; ++i) {
    ComparisonRow row;
    row.step = static_cast<int>(i) + 1;
    if (i < cv_sequence.size()) row.cv_pair = cv_sequence[i];
    if (i < lp_sequence.size()) row.lp_pair = lp_sequence[i];
    row.agree = row.cv_pair && row.lp_pair && canonical(*row.cv_pair) == canonical(*row.lp_pair);
    out.push_back(row);
  }
  return out;
}

}  // namespace gridctrl
