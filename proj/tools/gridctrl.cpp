// gridctrl: command-line front end for the controllability toolkit.
//
// Exit codes: 0 success, 1 the problem is infeasible (or the topology makes
// it unsolvable), 2 bad input. Errors print one line on stderr:
//   gridctrl: error: <kind>: <message>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "gridctrl/bounds.hpp"
#include "gridctrl/dcsens.hpp"
#include "gridctrl/errors.hpp"
#include "gridctrl/network.hpp"
#include "gridctrl/opf.hpp"
#include "gridctrl/place_cv.hpp"
#include "gridctrl/place_lp.hpp"

namespace {

using namespace gridctrl;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInput = 2;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // no "-0"
  return fmt::format("{:.12g}", v);
}

std::string pair_label(BusPair p) { return fmt::format("{}-{}", p.m, p.n); }

// "4-8" or "4,8"
BusPair parse_pair(const std::string& text) {
  const auto sep = text.find_first_of("-,:");
  if (sep == std::string::npos || sep == 0) throw InputError(fmt::format("cannot parse bus pair '{}'", text));
  try {
    std::size_t used_a = 0, used_b = 0;
    const int m = std::stoi(text.substr(0, sep), &used_a);
    const int n = std::stoi(text.substr(sep + 1), &used_b);
    if (used_a != sep || used_b != text.size() - sep - 1) throw std::invalid_argument(text);
    return {m, n};
  } catch (const std::exception&) {
    throw InputError(fmt::format("cannot parse bus pair '{}'", text));
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<BusPair> parse_pairs(const std::string& text) {
  std::vector<BusPair> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_pair(item));
  return out;
}

std::map<int, double> parse_assignments(const std::string& text) {
  std::map<int, double> out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError(fmt::format("expected id=value, got '{}'", item));
    try {
      out[std::stoi(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError(fmt::format("expected id=value, got '{}'", item));
    }
  }
  return out;
}

std::vector<int> parse_ids(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InputError(fmt::format("expected an integer id, got '{}'", item));
    }
  }
  return out;
}

struct Common {
  std::string case_path;
  std::string format;  // empty = by extension
  std::string output = "csv";
};

Network read_case(const Common& c) {
  std::ifstream in(c.case_path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read {}", c.case_path));
  std::ostringstream buf;
  buf << in.rdbuf();
  CaseFormat fmt_kind = format_from_path(c.case_path);
  if (c.format == "json") fmt_kind = CaseFormat::Json;
  if (c.format == "matpower") fmt_kind = CaseFormat::Matpower;
  return parse_case(buf.str(), fmt_kind);
}

bool json_out(const Common& c) { return c.output == "json"; }

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

Network checked_case(const Common& c) {
  Network net = read_case(c);
  auto report = validate(net);
  if (!report.ok()) throw InputError(fmt::format("case is invalid: {}", report.violations.front().message));
  return net;
}

// Injection profile from the economic dispatch (no controllers), MW.
std::vector<double> dispatch_injection_mw(const Network& net) {
  auto sol = dc_opf(net, {});
  if (!sol.optimal()) throw InfeasibleError("OPF for the default injection profile is infeasible");
  std::vector<double> inj(net.num_buses(), 0.0);
  for (std::size_t g = 0; g < net.generators.size(); ++g) inj[net.bus_index(net.generators[g].bus)] += sol.p_gen[g];
  auto loads = net.load_per_bus();
  for (int b = 0; b < net.num_buses(); ++b) inj[b] -= loads[b];
  return inj;
}

// ---------------------------------------------------------------- commands

int cmd_validate(const Common& c) {
  Network net = read_case(c);
  auto report = validate(net);
  if (json_out(c)) {
    ordered_json j;
    j["valid"] = report.ok();
    j["violations"] = ordered_json::array();
    for (const auto& v : report.violations) {
      j["violations"].push_back({{"kind", std::string(to_string(v.kind))}, {"message", v.message}, {"buses", v.buses}});
    }
    print_json(j);
  } else if (report.ok()) {
    std::cout << "ok\n";
  } else {
    std::cout << "kind,message\n";
    for (const auto& v : report.violations) std::cout << to_string(v.kind) << "," << v.message << "\n";
  }
  if (!report.ok()) {
    std::cerr << "gridctrl: error: input: case has " << report.violations.size() << " violation(s)\n";
    return kExitInput;
  }
  return kExitOk;
}

int cmd_ptdf(const Common& c) {
  const Network net = checked_case(c);
  const auto p = ptdf(net);
  if (json_out(c)) {
    ordered_json j;
    j["slack_bus"] = p.bus_ids[p.slack_index];
    j["bus_ids"] = p.bus_ids;
    j["line_ids"] = p.line_ids;
    j["values"] = ordered_json::array();
    for (int r = 0; r < p.num_lines(); ++r) {
      std::vector<double> row;
      for (int b = 0; b < p.num_buses(); ++b) row.push_back(p.values(r, b));
      j["values"].push_back(row);
    }
    print_json(j);
    return kExitOk;
  }
  std::cout << "line_id";
  for (int id : p.bus_ids) std::cout << "," << id;
  std::cout << "\n";
  for (int r = 0; r < p.num_lines(); ++r) {
    std::cout << p.line_ids[r];
    for (int b = 0; b < p.num_buses(); ++b) std::cout << "," << num(p.values(r, b));
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_cv(const Common& c, const std::string& pair_text, bool all) {
  const Network net = checked_case(c);
  const auto p = ptdf(net);
  std::vector<BusPair> pairs;
  if (all) {
    pairs = all_pairs(p);
  } else if (!pair_text.empty()) {
    pairs.push_back(parse_pair(pair_text));
  } else {
    throw InputError("cv needs --pair m,n or --all");
  }
  std::vector<Eigen::VectorXd> cols;
  for (const auto& pr : pairs) cols.push_back(cv(p, pr).values);
  if (json_out(c)) {
    ordered_json j;
    j["line_ids"] = p.line_ids;
    j["vectors"] = ordered_json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      j["vectors"].push_back({{"m", pairs[k].m}, {"n", pairs[k].n}, {"values", std::vector<double>(cols[k].data(), cols[k].data() + cols[k].size())}});
    }
    print_json(j);
    return kExitOk;
  }
  std::cout << "line_id";
  for (const auto& pr : pairs) std::cout << "," << pair_label(pr);
  std::cout << "\n";
  for (int r = 0; r < p.num_lines(); ++r) {
    std::cout << p.line_ids[r];
    for (const auto& col : cols) std::cout << "," << num(col(r));
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_lodf(const Common& c) {
  const Network net = checked_case(c);
  const auto l = lodf(net);
  const auto n = static_cast<int>(l.line_ids.size());
  if (json_out(c)) {
    ordered_json j;
    j["line_ids"] = l.line_ids;
    j["islanding"] = ordered_json::array();
    for (int k = 0; k < n; ++k) {
      if (l.islanding[k]) j["islanding"].push_back(l.line_ids[k]);
    }
    j["values"] = ordered_json::array();
    for (int r = 0; r < n; ++r) {
      ordered_json row = ordered_json::array();
      for (int k = 0; k < n; ++k) row.push_back(l.islanding[k] ? ordered_json(nullptr) : ordered_json(l.values(r, k)));
      j["values"].push_back(row);
    }
    print_json(j);
    return kExitOk;
  }
  std::cout << "line_id";
  for (int id : l.line_ids) std::cout << "," << id;
  std::cout << "\n";
  for (int r = 0; r < n; ++r) {
    std::cout << l.line_ids[r];
    for (int k = 0; k < n; ++k) std::cout << "," << (l.islanding[k] ? std::string("islanding") : num(l.values(r, k)));
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_bounds(const Common& c) {
  const Network net = checked_case(c);
  const auto b = bounds(net);
  ordered_json j;
  j["series_bound"] = b.series_bound;
  j["parallel_bound"] = b.parallel_bound;
  j["ptdf_rank"] = b.ptdf_rank;
  std::cout << j.dump() << "\n";
  return kExitOk;
}

int cmd_fix_flows(const Common& c, const std::string& fix_text, const std::string& inject_text) {
  const Network net = checked_case(c);
  std::vector<double> mw(net.num_buses(), 0.0);
  if (inject_text.empty()) {
    mw = dispatch_injection_mw(net);
  } else {
    for (const auto& [bus, value] : parse_assignments(inject_text)) mw[net.bus_index(bus)] += value;
  }
  const auto inj = injection_from_mw(net, mw);
  std::map<int, double> fixed;
  for (const auto& [id, value] : parse_assignments(fix_text)) fixed[id] = value / net.base_mva;
  const auto outcome = solve_fixed_flows(net, inj, fixed);

  ordered_json j;
  if (const auto* u = std::get_if<UniqueFlows>(&outcome)) {
    if (json_out(c)) {
      j["status"] = "unique";
      j["flows"] = ordered_json::array();
      for (const auto& [id, f] : u->flows) j["flows"].push_back({{"line_id", id}, {"flow_mw", f * net.base_mva}});
      print_json(j);
    } else {
      std::cout << "status,unique\nline_id,flow_mw\n";
      for (const auto& [id, f] : u->flows) std::cout << id << "," << num(f * net.base_mva) << "\n";
    }
  } else if (const auto* d = std::get_if<Underdetermined>(&outcome)) {
    if (json_out(c)) {
      print_json({{"status", "underdetermined"}, {"freedom", d->freedom}});
    } else {
      std::cout << "status,underdetermined\nfreedom," << d->freedom << "\n";
    }
  } else {
    const auto& bad = std::get<Inconsistent>(outcome);
    if (json_out(c)) {
      print_json({{"status", "inconsistent"}, {"residual_mw", bad.residual * net.base_mva}});
    } else {
      std::cout << "status,inconsistent\nresidual_mw," << num(bad.residual * net.base_mva) << "\n";
    }
  }
  return kExitOk;
}

void print_cv_steps(const CvPlacementResult& result) {
  std::string seq;
  for (const auto& p : result.placements()) seq += (seq.empty() ? "" : ",") + pair_label(p);
  std::cout << "# placements: " << seq << "\n";
  std::cout << "step,pair,cosphi,dimension,log_volume,selected_flag\n";
  for (std::size_t s = 0; s < result.steps.size(); ++s) {
    for (const auto& row : result.steps[s].table) {
      std::cout << s + 1 << "," << pair_label(row.pair) << "," << (row.cosphi ? num(*row.cosphi) : std::string()) << ","
                << row.score.dimension << "," << num(row.score.log_volume) << "," << (row.selected ? 1 : 0) << "\n";
    }
  }
}

ordered_json cv_steps_json(const CvPlacementResult& result) {
  ordered_json steps = ordered_json::array();
  for (const auto& step : result.steps) {
    ordered_json table = ordered_json::array();
    for (const auto& row : step.table) {
      table.push_back({{"pair", pair_label(row.pair)},
                       {"cosphi", row.cosphi ? ordered_json(*row.cosphi) : ordered_json(nullptr)},
                       {"dimension", row.score.dimension},
                       {"log_volume", row.score.log_volume},
                       {"selected", row.selected}});
    }
    steps.push_back({{"chosen", pair_label(step.chosen)}, {"candidates", table}});
  }
  return steps;
}

int cmd_place_cv(const Common& c, int count, const CvPlacementOptions& opts) {
  const Network net = merge_parallel_lines(checked_case(c));
  const auto result = place_cv(ptdf(net), count, opts);
  if (json_out(c)) {
    print_json({{"steps", cv_steps_json(result)}});
  } else {
    print_cv_steps(result);
  }
  return kExitOk;
}

int cmd_place_lp(const Common& c, int count, const std::string& strategy, double pdc_max) {
  if (count < 1) throw InputError("--count must be at least 1");
  const Network net = merge_parallel_lines(checked_case(c));
  const auto p = ptdf(net);
  const auto result = place_lp(net, p, count, parse_strategy(strategy), pdc_max);
  const auto& last = result.steps.back();
  std::string seq;
  for (const auto& pr : result.placements()) seq += (seq.empty() ? "" : ",") + pair_label(pr);
  if (json_out(c)) {
    ordered_json steps = ordered_json::array();
    for (const auto& step : result.steps) {
      ordered_json rows = ordered_json::array();
      for (const auto& row : step.ranking) {
        rows.push_back({{"pair", pair_label(row.pair)},
                        {"total_effort_mw", row.effort.total_effort},
                        {"relative_percent", row.relative_percent},
                        {"infeasible_sets", row.effort.infeasible_sets},
                        {"lp_count", row.effort.lp_count}});
      }
      steps.push_back({{"chosen", pair_label(step.chosen)}, {"lp_count", step.lp_count}, {"candidates", rows}});
    }
    print_json({{"strategy", std::string(strategy_name(parse_strategy(strategy).kind))}, {"steps", steps}});
    return kExitOk;
  }
  std::cout << "# placements: " << seq << "\n";
  std::cout << "pair,total_effort_MW,relative_percent,infeasible_sets,lp_count\n";
  for (const auto& row : last.ranking) {
    std::cout << pair_label(row.pair) << "," << num(row.effort.total_effort) << "," << num(row.relative_percent) << ","
              << row.effort.infeasible_sets << "," << row.effort.lp_count << "\n";
  }
  std::cout << "lp_count=" << last.lp_count << "\n";
  return kExitOk;
}

int cmd_compare(const Common& c, int count, const std::string& strategy, const CvPlacementOptions& opts, double pdc_max) {
  const Network net = merge_parallel_lines(checked_case(c));
  const auto p = ptdf(net);
  const auto cv_seq = place_cv(p, count, opts).placements();
  const auto lp_seq = place_lp(net, p, count, parse_strategy(strategy), pdc_max).placements();
  const auto rows = compare_placements(cv_seq, lp_seq);
  auto label = [](const std::optional<BusPair>& pr) { return pr ? pair_label(*pr) : std::string(); };
  if (json_out(c)) {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) j.push_back({{"step", r.step}, {"cv_pair", label(r.cv_pair)}, {"lp_pair", label(r.lp_pair)}, {"agree", r.agree}});
    print_json({{"comparison", j}});
    return kExitOk;
  }
  std::cout << "step,cv_pair,lp_pair,agree\n";
  for (const auto& r : rows) std::cout << r.step << "," << label(r.cv_pair) << "," << label(r.lp_pair) << "," << (r.agree ? 1 : 0) << "\n";
  return kExitOk;
}

void print_solution(const Common& c, const Network& net, const OpfSolution& sol) {
  if (json_out(c)) {
    ordered_json j;
    j["status"] = "optimal";
    j["cost"] = sol.cost;
    j["polynomial_cost"] = sol.polynomial_cost;
    j["dispatch"] = ordered_json::array();
    for (std::size_t g = 0; g < sol.p_gen.size(); ++g) j["dispatch"].push_back({{"generator", g}, {"bus", net.generators[g].bus}, {"p_mw", sol.p_gen[g]}});
    j["flows"] = ordered_json::array();
    for (std::size_t r = 0; r < sol.line_ids.size(); ++r) j["flows"].push_back({{"line_id", sol.line_ids[r]}, {"flow_mw", sol.flows(r)}});
    j["hvdc"] = ordered_json::array();
    for (std::size_t k = 0; k < sol.placements.size(); ++k) j["hvdc"].push_back({{"pair", pair_label(sol.placements[k])}, {"p_mw", sol.hvdc_base(k)}});
    j["hvdc_contingency"] = ordered_json::array();
    for (const auto& sp : sol.hvdc_contingency) {
      j["hvdc_contingency"].push_back({{"line_id", sp.line_id}, {"p_mw", std::vector<double>(sp.hvdc.data(), sp.hvdc.data() + sp.hvdc.size())}});
    }
    print_json(j);
    return;
  }
  std::cout << "status,cost,polynomial_cost\n";
  std::cout << "optimal," << num(sol.cost) << "," << num(sol.polynomial_cost) << "\n\n";
  std::cout << "generator,bus,p_mw\n";
  for (std::size_t g = 0; g < sol.p_gen.size(); ++g) std::cout << g << "," << net.generators[g].bus << "," << num(sol.p_gen[g]) << "\n";
  std::cout << "\nline_id,flow_mw,limit_mw\n";
  for (std::size_t r = 0; r < sol.line_ids.size(); ++r) {
    const auto& line = net.lines[net.line_index(sol.line_ids[r])];
    std::cout << sol.line_ids[r] << "," << num(sol.flows(r)) << "," << (line.limit ? num(*line.limit) : std::string("unlimited")) << "\n";
  }
  if (!sol.placements.empty()) {
    std::cout << "\npair,p_mw\n";
    for (std::size_t k = 0; k < sol.placements.size(); ++k) std::cout << pair_label(sol.placements[k]) << "," << num(sol.hvdc_base(k)) << "\n";
  }
  if (!sol.hvdc_contingency.empty()) {
    std::cout << "\ncontingency_line_id";
    for (const auto& p : sol.placements) std::cout << "," << pair_label(p);
    std::cout << "\n";
    for (const auto& sp : sol.hvdc_contingency) {
      std::cout << sp.line_id;
      for (Eigen::Index k = 0; k < sp.hvdc.size(); ++k) std::cout << "," << num(sp.hvdc(k));
      std::cout << "\n";
    }
  }
}

int cmd_opf(const Common& c, const std::string& placements, const OpfOptions& opts) {
  const Network net = checked_case(c);
  const auto sol = dc_opf(net, parse_pairs(placements), opts);
  if (!sol.optimal()) throw InfeasibleError("OPF is infeasible");
  print_solution(c, net, sol);
  return kExitOk;
}

std::vector<int> contingency_list(const Network& net, const std::string& text) {
  return text.empty() ? default_contingencies(net) : parse_ids(text);
}

int cmd_sc_opf(const Common& c, const std::string& placements, const std::string& mode, const std::string& contingencies, const OpfOptions& opts) {
  const Network net = checked_case(c);
  const auto sol = sc_opf(net, contingency_list(net, contingencies), parse_pairs(placements), parse_mode(mode), opts);
  if (!sol.optimal()) throw InfeasibleError(fmt::format("{} SC-OPF is infeasible", mode));
  print_solution(c, net, sol);
  return kExitOk;
}

int cmd_cos_curve(const Common& c, int max_count, const std::string& algorithm, const std::string& strategy, const std::string& mode,
                  const std::string& contingencies, const CvPlacementOptions& cv_opts, const OpfOptions& opf_opts, const std::string& dat_path) {
  const Network net = checked_case(c);
  CosCurveOptions opts;
  if (algorithm == "cv") {
    opts.algorithm = PlacementAlgorithm::Cv;
  } else if (algorithm == "lp") {
    opts.algorithm = PlacementAlgorithm::Lp;
  } else {
    throw InputError(fmt::format("unknown algorithm '{}' (expected cv or lp)", algorithm));
  }
  opts.strategy = parse_strategy(strategy);
  opts.mode = parse_mode(mode);
  opts.cv = cv_opts;
  opts.opf = opf_opts;
  const auto curve = cos_curve(net, contingency_list(net, contingencies), max_count, opts);

  if (json_out(c)) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : curve.points) {
      pts.push_back({{"count", p.count},
                     {"pair_m", p.pair ? ordered_json(p.pair->m) : ordered_json(nullptr)},
                     {"pair_n", p.pair ? ordered_json(p.pair->n) : ordered_json(nullptr)},
                     {"cos_percent", p.cos_percent},
                     {"cos_abs", p.cos_abs}});
    }
    print_json({{"points", pts}});
  } else {
    std::cout << "count,pair_m,pair_n,cos_percent,cos_abs\n";
    for (const auto& p : curve.points) {
      std::cout << p.count << "," << (p.pair ? std::to_string(p.pair->m) : "") << "," << (p.pair ? std::to_string(p.pair->n) : "") << ","
                << num(p.cos_percent) << "," << num(p.cos_abs) << "\n";
    }
  }
  if (!dat_path.empty()) {
    std::ofstream dat(dat_path, std::ios::binary);
    if (!dat) throw InputError(fmt::format("cannot write {}", dat_path));
    dat << "# controllers  cost_of_security_percent\n";
    for (const auto& p : curve.points) dat << p.count << " " << num(p.cos_percent) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-flow controllability analysis under the DC approximation"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--output", common.output, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--format", common.format, "Case format (default: by file extension)")->check(CLI::IsMember({"json", "matpower"}));

  auto add_case = [&](CLI::App* sub) { sub->add_option("case", common.case_path, "Case file (.json or MATPOWER .m)")->required(); };

  auto* validate_cmd = app.add_subcommand("validate", "Check a case for structural problems");
  add_case(validate_cmd);
  auto* ptdf_cmd = app.add_subcommand("ptdf", "Dump the PTDF matrix");
  add_case(ptdf_cmd);
  auto* cv_cmd = app.add_subcommand("cv", "Dump controllability vectors");
  add_case(cv_cmd);
  std::string cv_pair;
  bool cv_all = false;
  auto* cv_pair_opt = cv_cmd->add_option("--pair", cv_pair, "Bus pair m,n");
  cv_cmd->add_flag("--all", cv_all, "Every bus pair")->excludes(cv_pair_opt);
  auto* lodf_cmd = app.add_subcommand("lodf", "Dump the LODF matrix");
  add_case(lodf_cmd);
  auto* bounds_cmd = app.add_subcommand("bounds", "Controller-count bounds");
  add_case(bounds_cmd);

  auto* fix_cmd = app.add_subcommand("fix-flows", "Solve nodal balance with some line flows fixed");
  add_case(fix_cmd);
  std::string fix_text, inject_text;
  fix_cmd->add_option("--fix", fix_text, "Fixed flows line_id=MW,...");
  fix_cmd->add_option("--inject", inject_text, "Net injections bus=MW,... (default: economic dispatch)");

  CvPlacementOptions cv_opts;
  auto add_cv_opts = [&](CLI::App* sub) {
    sub->add_option("--cos-threshold", cv_opts.cos_threshold, "cos(phi) filter for candidates")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--candidate-cap", cv_opts.candidate_cap, "Candidates scored per step")->check(CLI::PositiveNumber);
  };
  double pdc_max = kInf;
  auto add_pdc = [&](CLI::App* sub) { sub->add_option("--pdc-max", pdc_max, "HVDC setpoint bound in MW (default unbounded)")->check(CLI::PositiveNumber); };

  auto* place_cv_cmd = app.add_subcommand("place-cv", "Placement by conical-hull volume");
  add_case(place_cv_cmd);
  int count = 1;
  place_cv_cmd->add_option("--count", count, "Number of links to place")->required()->check(CLI::NonNegativeNumber);
  add_cv_opts(place_cv_cmd);

  auto* place_lp_cmd = app.add_subcommand("place-lp", "Placement by minimum control effort");
  add_case(place_lp_cmd);
  std::string strategy = "limit";
  place_lp_cmd->add_option("--count", count, "Number of links to place")->required()->check(CLI::PositiveNumber);
  place_lp_cmd->add_option("--strategy", strategy, "Flow-change targets")->required()->check(CLI::IsMember({"const", "limit", "reactance"}));
  add_pdc(place_lp_cmd);

  auto* compare_cmd = app.add_subcommand("compare-placements", "Run both placement algorithms side by side");
  add_case(compare_cmd);
  compare_cmd->add_option("--count", count, "Number of links to place")->required()->check(CLI::PositiveNumber);
  compare_cmd->add_option("--strategy", strategy, "Flow-change targets for the LP algorithm")->check(CLI::IsMember({"const", "limit", "reactance"}));
  add_cv_opts(compare_cmd);
  add_pdc(compare_cmd);

  OpfOptions opf_opts;
  std::string placements;
  auto add_opf_opts = [&](CLI::App* sub) {
    sub->add_option("--placements", placements, "HVDC links m-n,...");
    sub->add_option("--segments", opf_opts.segments, "Piecewise-linear segments per quadratic cost")->check(CLI::PositiveNumber);
    add_pdc(sub);
  };
  auto* opf_cmd = app.add_subcommand("opf", "DC optimal power flow");
  add_case(opf_cmd);
  add_opf_opts(opf_cmd);

  auto* scopf_cmd = app.add_subcommand("sc-opf", "Security-constrained DC OPF");
  add_case(scopf_cmd);
  add_opf_opts(scopf_cmd);
  std::string mode = "preventive";
  std::string contingencies;
  scopf_cmd->add_option("--mode", mode, "preventive or corrective")->check(CLI::IsMember({"preventive", "corrective"}));
  scopf_cmd->add_option("--contingencies", contingencies, "Line ids (default: all non-islanding lines)");

  auto* curve_cmd = app.add_subcommand("cos-curve", "Cost of Security as links are added");
  add_case(curve_cmd);
  int max_count = 0;
  std::string algorithm = "cv";
  std::string curve_mode = "corrective";
  std::string dat_path;
  curve_cmd->add_option("--max", max_count, "Largest number of links")->required()->check(CLI::NonNegativeNumber);
  curve_cmd->add_option("--algorithm", algorithm, "Placement algorithm")->required()->check(CLI::IsMember({"cv", "lp"}));
  curve_cmd->add_option("--strategy", strategy, "Flow-change targets for --algorithm lp")->check(CLI::IsMember({"const", "limit", "reactance"}));
  curve_cmd->add_option("--mode", curve_mode, "preventive or corrective")->check(CLI::IsMember({"preventive", "corrective"}));
  curve_cmd->add_option("--contingencies", contingencies, "Line ids (default: all non-islanding lines)");
  curve_cmd->add_option("--dat", dat_path, "Also write gnuplot data to this file");
  curve_cmd->add_option("--segments", opf_opts.segments, "Piecewise-linear segments per quadratic cost")->check(CLI::PositiveNumber);
  add_pdc(curve_cmd);
  add_cv_opts(curve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "gridctrl: error: usage: " << msg << "\n";
    return kExitInput;
  }

  opf_opts.p_dc_max = pdc_max;
  try {
    if (*validate_cmd) return cmd_validate(common);
    if (*ptdf_cmd) return cmd_ptdf(common);
    if (*cv_cmd) return cmd_cv(common, cv_pair, cv_all);
    if (*lodf_cmd) return cmd_lodf(common);
    if (*bounds_cmd) return cmd_bounds(common);
    if (*fix_cmd) return cmd_fix_flows(common, fix_text, inject_text);
    if (*place_cv_cmd) return cmd_place_cv(common, count, cv_opts);
    if (*place_lp_cmd) return cmd_place_lp(common, count, strategy, pdc_max);
    if (*compare_cmd) return cmd_compare(common, count, strategy, cv_opts, pdc_max);
    if (*opf_cmd) return cmd_opf(common, placements, opf_opts);
    if (*scopf_cmd) return cmd_sc_opf(common, placements, mode, contingencies, opf_opts);
    if (*curve_cmd) return cmd_cos_curve(common, max_count, algorithm, strategy, curve_mode, contingencies, cv_opts, opf_opts, dat_path);
  } catch (const ParseError& e) {
    std::cerr << "gridctrl: error: parse: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "gridctrl: error: input: " << e.what() << "\n";
    return kExitInput;
  } catch (const InfeasibleError& e) {
    std::cerr << "gridctrl: error: infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const TopologyError& e) {
    std::cerr << "gridctrl: error: topology: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "gridctrl: error: internal: " << e.what() << "\n";
    return 3;
  }
  return kExitInput;
}
