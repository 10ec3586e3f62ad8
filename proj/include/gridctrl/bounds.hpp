#pragma once

#include <map>
#include <span>
#include <variant>

#include "gridctrl/dcsens.hpp"

namespace gridctrl {

// Nodal balance P_B = A * P_L with a signed incidence matrix: +1 where a
// line leaves a bus (from side), -1 where it arrives.
struct IncidenceSystem {
  Eigen::MatrixXd a;  // n_B x n_L
  Eigen::VectorXd p_b;
  std::vector<int> line_ids;
};

IncidenceSystem incidence_system(const Network& net, const InjectionProfile<double>& inj);

struct BoundsReport {
  int series_bound = 0;    // n_L - n_B + 1
  int parallel_bound = 0;  // n_B - 1
  int ptdf_rank = 0;
};

// Controller-count bounds on the merged, in-service topology.
BoundsReport bounds(const Network& net);

struct UniqueFlows {
  std::map<int, double> flows;  // every in-service line, fixed ones included
};
struct Underdetermined {
  int freedom = 0;
};
struct Inconsistent {
  double residual = 0.0;
};
using FixedFlowOutcome = std::variant<UniqueFlows, Underdetermined, Inconsistent>;

// Fix some line flows (per unit) and ask whether nodal balance pins down the
// rest. Classification is by rank with the shared relative threshold.
FixedFlowOutcome solve_fixed_flows(const Network& net, const InjectionProfile<double>& inj, const std::map<int, double>& fixed);

// Rank of [CV(p1) CV(p2) ...].
int controllability_rank(std::span<const BusPair> placements, const PtdfMatrix<double>& ptdf);

}  // namespace gridctrl
