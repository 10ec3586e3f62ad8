#pragma once

// DC optimal power flow with HVDC links, its security-constrained variants,
// and the Cost of Security they imply.
//
// Quadratic generator costs are piecewise-linearized over [p_min, p_max] so
// every problem is an LP for the embedded simplex. `cost` is the value of
// that piecewise-linear cost at the optimal dispatch (exact for linear
// costs and at segment breakpoints); `polynomial_cost` evaluates the
// original polynomial at the same dispatch.

#include <optional>
#include <span>
#include <vector>

#include "gridctrl/dcsens.hpp"
#include "gridctrl/lp.hpp"
#include "gridctrl/place_cv.hpp"
#include "gridctrl/place_lp.hpp"

namespace gridctrl {

enum class ScMode { Preventive, Corrective };

ScMode parse_mode(std::string_view name);
std::string_view mode_name(ScMode mode);

struct OpfOptions {
  int segments = 10;
  double p_dc_max = kInf;  // MW
};

struct ContingencySetpoints {
  int line_id = 0;
  Eigen::VectorXd hvdc;  // MW
};

struct OpfSolution {
  enum class Status { Optimal, Infeasible };
  Status status = Status::Infeasible;
  std::vector<double> p_gen;  // MW, one per generator
  Eigen::VectorXd flows;      // MW, one per in-service line
  std::vector<int> line_ids;
  std::vector<BusPair> placements;
  Eigen::VectorXd hvdc_base;                      // MW
  std::vector<ContingencySetpoints> hvdc_contingency;  // corrective mode only
  double cost = 0.0;                               // $/h
  double polynomial_cost = 0.0;                    // $/h

  bool optimal() const { return status == Status::Optimal; }
};

OpfSolution dc_opf(const Network& net, std::span<const BusPair> placements, const OpfOptions& options = {});

// In-service lines whose outage keeps the network connected.
std::vector<int> default_contingencies(const Network& net);

// Throws TopologyError naming every contingency that islands the network.
OpfSolution sc_opf(const Network& net, std::span<const int> contingencies, std::span<const BusPair> placements, ScMode mode,
                   const OpfOptions& options = {});

struct CostOfSecurity {
  double cos_abs = 0.0;      // $/h
  double cos_percent = 0.0;  // of the OPF cost
  OpfSolution opf;
  OpfSolution scopf;
};

// Throws InfeasibleError naming the solve that failed.
CostOfSecurity cost_of_security(const Network& net, std::span<const int> contingencies, std::span<const BusPair> placements, ScMode mode,
                                const OpfOptions& options = {});

enum class PlacementAlgorithm { Cv, Lp };

struct CosPoint {
  int count = 0;
  std::optional<BusPair> pair;  // link added at this count
  double cos_percent = 0.0;
  double cos_abs = 0.0;
};

struct CosCurve {
  std::vector<CosPoint> points;
};

struct CosCurveOptions {
  PlacementAlgorithm algorithm = PlacementAlgorithm::Cv;
  DeltaStrategy strategy = DeltaStrategy::proportional_limit();
  CvPlacementOptions cv;
  ScMode mode = ScMode::Corrective;
  OpfOptions opf;
};

// Places links one at a time with the chosen algorithm (on the merged
// network) and records the Cost of Security after each.
CosCurve cos_curve(const Network& net, std::span<const int> contingencies, int max_controllers, const CosCurveOptions& options = {});

}  // namespace gridctrl
