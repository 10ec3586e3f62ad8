#pragma once

// Placement by minimum control effort: for a set of k target lines and k
// HVDC links, the least total |P_DC| that moves each target line's flow by
// its requested delta,
//
//   min 1't   s.t.  CV_T * p = delta_T,  -t <= p <= t,  t >= 0,  |p| <= p_max,
//
// summed over every k-subset of lines. Lower is better.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gridctrl/dcsens.hpp"
#include "gridctrl/lp.hpp"

namespace gridctrl {

struct DeltaStrategy {
  enum class Kind { Constant, ProportionalLimit, ProportionalReactance };
  Kind kind = Kind::Constant;
  double parameter = 100.0;

  static DeltaStrategy constant(double mw = 100.0) { return {Kind::Constant, mw}; }
  static DeltaStrategy proportional_limit(double fraction = 0.1) { return {Kind::ProportionalLimit, fraction}; }
  static DeltaStrategy proportional_reactance(double scale = 1000.0) { return {Kind::ProportionalReactance, scale}; }
};

// "const" | "limit" | "reactance", with the default parameters.
DeltaStrategy parse_strategy(std::string_view name);
std::string_view strategy_name(DeltaStrategy::Kind kind);

// Requested flow change (MW) per PTDF row.
Eigen::VectorXd delta_targets(const Network& net, const PtdfMatrix<double>& ptdf, const DeltaStrategy& strategy);

// Minimum sum |P_DC| in MW, or nullopt when the targets cannot be met.
// `targets` are PTDF row indices; |targets| must equal |placements|.
std::optional<double> control_effort(const PtdfMatrix<double>& ptdf, std::span<const BusPair> placements, std::span<const int> targets,
                                     const Eigen::VectorXd& delta, double p_dc_max = kInf);

// Convenience overload taking line ids and a strategy.
std::optional<double> control_effort(const Network& net, const PtdfMatrix<double>& ptdf, std::span<const BusPair> placements,
                                     std::span<const int> target_line_ids, const DeltaStrategy& strategy, double p_dc_max = kInf);

struct EffortResult {
  double total_effort = 0.0;  // MW, summed over feasible target sets
  int infeasible_sets = 0;
  int lp_count = 0;
};

struct EffortRow {
  BusPair pair;
  EffortResult effort;
  double relative_percent = 0.0;  // of the worst candidate with a feasible set

  bool all_infeasible() const { return effort.infeasible_sets == effort.lp_count; }
};

struct LpPlacementStep {
  std::vector<BusPair> existing;
  std::vector<EffortRow> ranking;  // best first
  BusPair chosen;
  long lp_count = 0;  // LPs solved in this step
};

// Scores every bus pair (already placed ones included) as the next link.
LpPlacementStep place_lp_next(const Network& net, const PtdfMatrix<double>& ptdf, std::span<const BusPair> existing,
                              const DeltaStrategy& strategy, double p_dc_max = kInf);

struct LpPlacementResult {
  std::vector<LpPlacementStep> steps;

  std::vector<BusPair> placements() const {
    std::vector<BusPair> out;
    for (const auto& s : steps) out.push_back(s.chosen);
    return out;
  }
};

LpPlacementResult place_lp(const Network& net, const PtdfMatrix<double>& ptdf, int count, const DeltaStrategy& strategy,
                           double p_dc_max = kInf);

struct ComparisonRow {
  int step = 0;  // 1-based
  std::optional<BusPair> cv_pair;
  std::optional<BusPair> lp_pair;
  bool agree = false;
};

// Side-by-side placement sequences; pairs compare as unordered.
std::vector<ComparisonRow> compare_placements(std::span<const BusPair> cv_sequence, std::span<const BusPair> lp_sequence);

// k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace gridctrl
