#include "gridctrl/bounds.hpp"

#include <algorithm>
#include <set>

namespace gridctrl {

IncidenceSystem incidence_system(const Network& net, const InjectionProfile<double>& inj) {
  const auto active = net.in_service_lines();
  IncidenceSystem sys;
  sys.a = Eigen::MatrixXd::Zero(net.num_buses(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) {
    const Line& line = net.lines[active[c]];
    sys.a(net.bus_index(line.from_bus), c) = 1.0;
    sys.a(net.bus_index(line.to_bus), c) = -1.0;
    sys.line_ids.push_back(line.id);
  }
  if (inj.p.size() != net.num_buses()) throw InputError("injection profile length does not match the bus count");
  sys.p_b = inj.p;
  return sys;
}

BoundsReport bounds(const Network& net) {
  const Network merged = merge_parallel_lines(net);
  detail::require_connected(merged);
  const int nb = merged.num_buses();
  const int nl = static_cast<int>(merged.in_service_lines().size());
  BoundsReport report;
  report.series_bound = nl - nb + 1;
  report.parallel_bound = nb - 1;
  report.ptdf_rank = numerical_rank(ptdf(merged).values);
  return report;
}

FixedFlowOutcome solve_fixed_flows(const Network& net, const InjectionProfile<double>& inj, const std::map<int, double>& fixed) {
  const IncidenceSystem sys = incidence_system(net, inj);
  const Eigen::Index nl = sys.a.cols();

  std::vector<Eigen::Index> free_cols;
  Eigen::VectorXd rhs = sys.p_b;
  std::set<int> seen;
  for (Eigen::Index c = 0; c < nl; ++c) {
    auto it = fixed.find(sys.line_ids[c]);
    if (it == fixed.end()) {
      free_cols.push_back(c);
    } else {
      rhs -= sys.a.col(c) * it->second;
      seen.insert(it->first);
    }
  }
  for (const auto& [id, value] : fixed) {
    if (!seen.count(id)) throw InputError(fmt::format("fixed flow on unknown or out-of-service line {}", id));
  }

  const Eigen::MatrixXd reduced = sys.a(Eigen::all, free_cols);
  const double scale = std::max({1.0, sys.p_b.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()});

  if (free_cols.empty()) {
    double residual = rhs.cwiseAbs().maxCoeff();
    if (residual > 1e-9 * scale) return Inconsistent{residual};
    UniqueFlows out;
    for (const auto& [id, v] : fixed) out.flows[id] = v;
    return out;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
  const Eigen::VectorXd x = cod.solve(rhs);
  const double residual = (reduced * x - rhs).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * scale) return Inconsistent{residual};

  const int rank = numerical_rank(reduced);
  const int freedom = static_cast<int>(free_cols.size()) - rank;
  if (freedom > 0) return Underdetermined{freedom};

  UniqueFlows out;
  for (const auto& [id, v] : fixed) out.flows[id] = v;
  for (std::size_t k = 0; k < free_cols.size(); ++k) out.flows[sys.line_ids[free_cols[k]]] = x(static_cast<Eigen::Index>(k));
  return out;
}

int controllability_rank(std::span<const BusPair> placements, const PtdfMatrix<double>& ptdf) {
  if (placements.empty()) return 0;
  return numerical_rank(cv_matrix(ptdf, placements));
}

}  // namespace gridctrl
