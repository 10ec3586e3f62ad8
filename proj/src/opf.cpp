#include "gridctrl/opf.hpp"

#include <algorithm>
#include <map>

namespace gridctrl {

ScMode parse_mode(std::string_view name) {
  if (name == "preventive") return ScMode::Preventive;
  if (name == "corrective") return ScMode::Corrective;
  throw InputError(fmt::format("unknown mode '{}' (expected preventive or corrective)", name));
}

std::string_view mode_name(ScMode mode) { return mode == ScMode::Preventive ? "preventive" : "corrective"; }

namespace {

// Variables shared by every OPF flavour: generator cost segments and the
// base-case HVDC setpoints.
struct OpfModel {
  const Network& net;
  const OpfOptions& options;
  LpBuilder lp;
  std::vector<std::vector<int>> segments;  // per generator
  std::vector<double> cost_constant;       // $/h at p_min, per generator
  std::vector<int> hvdc;
  double base = 1.0;

  OpfModel(const Network& n, const OpfOptions& o) : net(n), options(o), base(n.base_mva) {
    if (options.segments < 1) throw InputError("piecewise-linear segment count must be at least 1");
    if (!(options.p_dc_max > 0.0)) throw InputError("p_dc_max must be positive");
    for (const auto& gen : net.generators) {
      std::vector<int> segs;
      const double width_mw = gen.p_max - gen.p_min;
      if (width_mw < 0.0) throw InputError("generator with p_min > p_max");
      const int count = (gen.cost[2] == 0.0 || width_mw == 0.0) ? 1 : options.segments;
      const double w = width_mw / count;
      for (int k = 0; k < count; ++k) {
        const double a = gen.p_min + k * w;
        const double b = (k + 1 == count) ? gen.p_max : a + w;
        const double slope = (b > a) ? (gen.cost_at(b) - gen.cost_at(a)) / (b - a) : 0.0;  // $/MWh
        segs.push_back(lp.add_variable(0.0, (b - a) / base, slope * base));
      }
      segments.push_back(std::move(segs));
      cost_constant.push_back(gen.cost_at(gen.p_min));
    }
  }

  std::vector<int> add_hvdc(std::size_t count) {
    std::vector<int> vars;
    const double bound = options.p_dc_max / base;
    for (std::size_t j = 0; j < count; ++j) vars.push_back(lp.add_variable(-bound, bound, 0.0));
    return vars;
  }

  // Bus injections as affine forms in the LP variables (per unit).
  void injection_forms(Eigen::MatrixXd& coef, Eigen::VectorXd& constant, int num_vars) const {
    coef = Eigen::MatrixXd::Zero(net.num_buses(), num_vars);
    constant = Eigen::VectorXd::Zero(net.num_buses());
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
      const int b = net.bus_index(net.generators[g].bus);
      constant(b) += net.generators[g].p_min / base;
      for (int v : segments[g]) coef(b, v) += 1.0;
    }
    const auto loads = net.load_per_bus();
    for (int b = 0; b < net.num_buses(); ++b) constant(b) -= loads[b] / base;
  }

  void add_balance() {
    LpBuilder::Terms terms;
    double p_min_total = 0.0;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
      p_min_total += net.generators[g].p_min;
      for (int v : segments[g]) terms.emplace_back(v, 1.0);
    }
    lp.add_equality(terms, (net.total_load() - p_min_total) / base);
  }

  // lo <= coef'x + constant <= hi for every line with a limit.
  void add_limits(const Eigen::MatrixXd& coef, const Eigen::VectorXd& constant, const std::vector<int>& line_ids,
                  std::optional<int> skip_line = std::nullopt) {
    for (Eigen::Index r = 0; r < coef.rows(); ++r) {
      if (skip_line && line_ids[r] == *skip_line) continue;
      const Line& line = net.lines[net.line_index(line_ids[r])];
      if (!line.limit) continue;
      LpBuilder::Terms terms;
      for (Eigen::Index v = 0; v < coef.cols(); ++v) {
        if (std::abs(coef(r, v)) > 1e-13) terms.emplace_back(static_cast<int>(v), coef(r, v));
      }
      const double f = *line.limit / base;
      if (terms.empty()) {
        // Flow is fixed; only the bound check remains.
        if (std::abs(constant(r)) > f + 1e-9) lp.add_equality({}, 1.0);  // forces infeasibility
        continue;
      }
      lp.add_row(terms, -f - constant(r), f - constant(r));
    }
  }

  OpfSolution extract(const LpResult& result, const Eigen::MatrixXd& flow_coef, const Eigen::VectorXd& flow_const,
                      const std::vector<int>& line_ids, std::span<const BusPair> placements) const {
    OpfSolution sol;
    sol.line_ids = line_ids;
    sol.placements.assign(placements.begin(), placements.end());
    if (std::holds_alternative<LpInfeasible>(result)) return sol;
    if (std::holds_alternative<LpStalled>(result)) throw std::runtime_error("OPF LP stalled");
    if (std::holds_alternative<LpUnbounded>(result)) throw std::runtime_error("OPF LP unbounded");
    const auto& opt = std::get<LpOptimal>(result);
    const Eigen::VectorXd x = opt.x.head(lp.num_variables());
    sol.status = OpfSolution::Status::Optimal;
    sol.cost = opt.objective;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
      double p = net.generators[g].p_min;
      for (int v : segments[g]) p += x(v) * base;
      sol.p_gen.push_back(p);
      sol.cost += cost_constant[g];
      sol.polynomial_cost += net.generators[g].cost_at(p);
    }
    sol.flows = (flow_coef * x + flow_const) * base;
    sol.hvdc_base = Eigen::VectorXd(hvdc.size());
    for (std::size_t j = 0; j < hvdc.size(); ++j) sol.hvdc_base(j) = x(hvdc[j]) * base;
    return sol;
  }
};

// Base-case flow forms: PTDF * injections + CV * hvdc.
void flow_forms(const PtdfMatrix<double>& ptdf, std::span<const BusPair> placements, const std::vector<int>& hvdc_vars,
                const Eigen::MatrixXd& inj_coef, const Eigen::VectorXd& inj_const, Eigen::MatrixXd& coef, Eigen::VectorXd& constant) {
  coef = ptdf.values * inj_coef;
  constant = ptdf.values * inj_const;
  for (std::size_t j = 0; j < placements.size(); ++j) coef.col(hvdc_vars[j]) += cv(ptdf, placements[j]).values;
}

Network without_line(const Network& net, int line_id) {
  Network out = net;
  out.lines[out.line_index(line_id)].in_service = false;
  return out;
}

void check_islanding(const Network& net, const LodfMatrix<double>& lodf, std::span<const int> contingencies) {
  std::vector<int> bad;
  for (int id : contingencies) {
    auto it = std::find(lodf.line_ids.begin(), lodf.line_ids.end(), id);
    if (it == lodf.line_ids.end()) throw InputError(fmt::format("contingency on unknown or out-of-service line {}", id));
    if (lodf.islanding[static_cast<std::size_t>(it - lodf.line_ids.begin())]) bad.push_back(id);
  }
  (void)net;
  if (!bad.empty()) {
    std::string ids;
    for (int id : bad) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw TopologyError(fmt::format("islanding contingencies: {}", ids));
  }
}

}  // namespace

OpfSolution dc_opf(const Network& net, std::span<const BusPair> placements, const OpfOptions& options) {
  return sc_opf(net, {}, placements, ScMode::Preventive, options);
}

std::vector<int> default_contingencies(const Network& net) {
  const auto lodf_m = lodf(net);
  std::vector<int> out;
  for (std::size_t k = 0; k < lodf_m.line_ids.size(); ++k) {
    if (!lodf_m.islanding[k]) out.push_back(lodf_m.line_ids[k]);
  }
  return out;
}

OpfSolution sc_opf(const Network& net, std::span<const int> contingencies, std::span<const BusPair> placements, ScMode mode,
                   const OpfOptions& options) {
  const auto ptdf_m = ptdf(net);
  for (const auto& p : placements) {
    if (p.m == p.n) throw InputError("HVDC link needs two distinct buses");
    ptdf_m.column_of(p.m);
    ptdf_m.column_of(p.n);
  }
  LodfMatrix<double> lodf_m;
  if (!contingencies.empty()) {
    lodf_m = lodf(net, ptdf_m);
    check_islanding(net, lodf_m, contingencies);
  }

  OpfModel model(net, options);
  model.hvdc = model.add_hvdc(placements.size());
  std::vector<std::vector<int>> recourse;
  if (mode == ScMode::Corrective) {
    for (std::size_t c = 0; c < contingencies.size(); ++c) recourse.push_back(model.add_hvdc(placements.size()));
  }
  const int nv = model.lp.num_variables();

  Eigen::MatrixXd inj_coef;
  Eigen::VectorXd inj_const;
  model.injection_forms(inj_coef, inj_const, nv);
  model.add_balance();

  Eigen::MatrixXd base_coef;
  Eigen::VectorXd base_const;
  flow_forms(ptdf_m, placements, model.hvdc, inj_coef, inj_const, base_coef, base_const);
  model.add_limits(base_coef, base_const, ptdf_m.line_ids);

  for (std::size_t c = 0; c < contingencies.size(); ++c) {
    const int out_id = contingencies[c];
    if (mode == ScMode::Preventive) {
      const int k = ptdf_m.row_of(out_id);
      const Eigen::MatrixXd coef = base_coef + lodf_m.values.col(k) * base_coef.row(k);
      const Eigen::VectorXd constant = base_const + lodf_m.values.col(k) * base_const(k);
      model.add_limits(coef, constant, ptdf_m.line_ids, out_id);
    } else {
      const auto outaged = ptdf(without_line(net, out_id));
      Eigen::MatrixXd coef;
      Eigen::VectorXd constant;
      flow_forms(outaged, placements, recourse[c], inj_coef, inj_const, coef, constant);
      model.add_limits(coef, constant, outaged.line_ids);
    }
  }

  const LpResult result = solve_lp(model.lp.build());
  OpfSolution sol = model.extract(result, base_coef, base_const, ptdf_m.line_ids, placements);
  if (sol.optimal() && mode == ScMode::Corrective) {
    const Eigen::VectorXd x = std::get<LpOptimal>(result).x;
    for (std::size_t c = 0; c < contingencies.size(); ++c) {
      ContingencySetpoints sp{contingencies[c], Eigen::VectorXd(placements.size())};
      for (std::size_t j = 0; j < placements.size(); ++j) sp.hvdc(j) = x(recourse[c][j]) * net.base_mva;
      sol.hvdc_contingency.push_back(std::move(sp));
    }
  }
  return sol;
}

constexpr double kCostNoise = 1e-9;

CostOfSecurity cost_of_security(const Network& net, std::span<const int> contingencies, std::span<const BusPair> placements, ScMode mode,
                                const OpfOptions& options) {
  CostOfSecurity out;
  out.opf = dc_opf(net, placements, options);
  if (!out.opf.optimal()) throw InfeasibleError("OPF is infeasible");
  out.scopf = sc_opf(net, contingencies, placements, mode, options);
  if (!out.scopf.optimal()) throw InfeasibleError(fmt::format("{} SC-OPF is infeasible", mode_name(mode)));
  out.cos_abs = out.scopf.cost - out.opf.cost;
  // both costs come out of separate simplex runs; differences at round-off level are zero
  if (std::abs(out.cos_abs) <= kCostNoise * std::max(1.0, std::abs(out.opf.cost))) out.cos_abs = 0.0;
  out.cos_percent = out.opf.cost != 0.0 ? 100.0 * out.cos_abs / out.opf.cost : 0.0;
  return out;
}

CosCurve cos_curve(const Network& net, std::span<const int> contingencies, int max_controllers, const CosCurveOptions& options) {
  if (max_controllers < 0) throw InputError("max_controllers must be non-negative");
  const Network merged = merge_parallel_lines(net);
  const auto ptdf_m = ptdf(merged);
  std::vector<BusPair> sequence;
  if (max_controllers > 0) {
    if (options.algorithm == PlacementAlgorithm::Cv) {
      sequence = place_cv(ptdf_m, max_controllers, options.cv).placements();
    } else {
      sequence = place_lp(merged, ptdf_m, max_controllers, options.strategy, options.opf.p_dc_max).placements();
    }
  }
  CosCurve curve;
  for (int count = 0; count <= max_controllers; ++count) {
    std::span<const BusPair> prefix(sequence.data(), static_cast<std::size_t>(count));
    const auto cos = cost_of_security(net, contingencies, prefix, options.mode, options.opf);
    CosPoint point;
    point.count = count;
    if (count > 0) point.pair = sequence[count - 1];
    point.cos_abs = cos.cos_abs;
    point.cos_percent = cos.cos_percent;
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace gridctrl
