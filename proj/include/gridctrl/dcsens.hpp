#pragma once

// DC power-flow sensitivities: susceptance matrices, PTDF, controllability
// vectors, TCSC reactance sensitivity and LODF. Everything is dense and
// templated on the scalar type; `double` is what the rest of the library uses.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "gridctrl/errors.hpp"
#include "gridctrl/linalg.hpp"
#include "gridctrl/network.hpp"

namespace gridctrl {

inline constexpr double kBalanceTolerance = 1e-9;

template <typename Scalar = double>
struct SusceptanceMatrices {
  MatrixX<Scalar> b_line;  // n_L x n_B
  MatrixX<Scalar> b_bus;   // n_B x n_B
  int slack_index = 0;
  std::vector<int> line_ids;  // row labels of b_line
};

template <typename Scalar = double>
struct PtdfMatrix {
  MatrixX<Scalar> values;  // n_L x n_B, slack column zero
  int slack_index = 0;
  std::vector<int> line_ids;
  std::vector<int> bus_ids;

  int num_lines() const { return static_cast<int>(values.rows()); }
  int num_buses() const { return static_cast<int>(values.cols()); }

  int column_of(int bus_id) const {
    for (int i = 0; i < num_buses(); ++i) {
      if (bus_ids[i] == bus_id) return i;
    }
    throw InputError(fmt::format("unknown bus {}", bus_id));
  }
  int row_of(int line_id) const {
    for (int i = 0; i < num_lines(); ++i) {
      if (line_ids[i] == line_id) return i;
    }
    throw InputError(fmt::format("unknown or out-of-service line {}", line_id));
  }
};

// Net injections per bus in per unit, ordered like Network::buses.
template <typename Scalar = double>
struct InjectionProfile {
  VectorX<Scalar> p;

  bool balanced(double tol = kBalanceTolerance) const { return std::abs(static_cast<double>(p.sum())) <= tol; }
};

template <typename Scalar = double>
struct ControllabilityVector {
  int m = 0;
  int n = 0;
  VectorX<Scalar> values;  // flow change on every line per unit HVDC flow m -> n
};

namespace detail {

inline void require_connected(const Network& net) {
  if (!is_connected(net)) throw TopologyError("network is not connected");
}

}  // namespace detail

template <typename Scalar = double>
SusceptanceMatrices<Scalar> build_susceptance(const Network& net) {
  const auto active = net.in_service_lines();
  const int nb = net.num_buses();
  const int nl = static_cast<int>(active.size());
  SusceptanceMatrices<Scalar> out;
  out.b_line = MatrixX<Scalar>::Zero(nl, nb);
  out.b_bus = MatrixX<Scalar>::Zero(nb, nb);
  out.slack_index = net.slack_index();
  out.line_ids.reserve(nl);
  for (int r = 0; r < nl; ++r) {
    const Line& line = net.lines[active[r]];
    if (!(line.reactance > 0.0)) throw InputError(fmt::format("line {} has non-positive reactance", line.id));
    const int i = net.bus_index(line.from_bus);
    const int j = net.bus_index(line.to_bus);
    if (i == j) throw InputError(fmt::format("line {} is a self loop", line.id));
    const Scalar b = Scalar(1) / static_cast<Scalar>(line.reactance);
    out.b_line(r, i) += b;
    out.b_line(r, j) -= b;
    out.b_bus(i, i) += b;
    out.b_bus(j, j) += b;
    out.b_bus(i, j) -= b;
    out.b_bus(j, i) -= b;
    out.line_ids.push_back(line.id);
  }
  return out;
}

// Inverse of b_bus with the slack row and column removed before inversion
// and restored as zeros afterwards.
template <typename Scalar>
MatrixX<Scalar> slack_inverse(const MatrixX<Scalar>& b_bus, int slack) {
  const Eigen::Index n = b_bus.rows();
  if (n <= 1) return MatrixX<Scalar>::Zero(n, n);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != slack) keep.push_back(i);
  }
  MatrixX<Scalar> reduced = b_bus(keep, keep);
  Eigen::LLT<MatrixX<Scalar>> llt(reduced);
  if (llt.info() != Eigen::Success) throw TopologyError("reduced bus susceptance matrix is singular");
  MatrixX<Scalar> inv = llt.solve(MatrixX<Scalar>::Identity(n - 1, n - 1));
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, n);
  out(keep, keep) = inv;
  return out;
}

template <typename Scalar = double>
PtdfMatrix<Scalar> ptdf(const Network& net) {
  detail::require_connected(net);
  auto sus = build_susceptance<Scalar>(net);
  PtdfMatrix<Scalar> out;
  out.values = sus.b_line * slack_inverse<Scalar>(sus.b_bus, sus.slack_index);
  out.values.col(sus.slack_index).setZero();
  out.slack_index = sus.slack_index;
  out.line_ids = std::move(sus.line_ids);
  for (const auto& bus : net.buses) out.bus_ids.push_back(bus.id);
  return out;
}

template <typename Scalar>
VectorX<Scalar> dc_flow(const PtdfMatrix<Scalar>& ptdf, const InjectionProfile<Scalar>& inj) {
  if (inj.p.size() != ptdf.num_buses()) throw InputError("injection profile length does not match the bus count");
  if (!inj.balanced()) throw InputError(fmt::format("unbalanced injection profile (sum {:.3g} pu)", static_cast<double>(inj.p.sum())));
  return ptdf.values * inj.p;
}

template <typename Scalar>
VectorX<Scalar> dc_flow(const Network& net, const InjectionProfile<Scalar>& inj) {
  return dc_flow(ptdf<Scalar>(net), inj);
}

template <typename Scalar>
ControllabilityVector<Scalar> cv(const PtdfMatrix<Scalar>& ptdf, int m, int n) {
  if (m == n) throw InputError(fmt::format("controllability vector needs two distinct buses, got {} twice", m));
  ControllabilityVector<Scalar> out{m, n, ptdf.values.col(ptdf.column_of(m)) - ptdf.values.col(ptdf.column_of(n))};
  return out;
}

template <typename Scalar>
ControllabilityVector<Scalar> cv(const PtdfMatrix<Scalar>& ptdf, BusPair pair) {
  return cv(ptdf, pair.m, pair.n);
}

// Stacked controllability vectors, one column per placement.
template <typename Scalar>
MatrixX<Scalar> cv_matrix(const PtdfMatrix<Scalar>& ptdf, std::span<const BusPair> placements) {
  MatrixX<Scalar> out(ptdf.num_lines(), static_cast<Eigen::Index>(placements.size()));
  for (std::size_t j = 0; j < placements.size(); ++j) out.col(j) = cv(ptdf, placements[j]).values;
  return out;
}

// Line-flow change from HVDC links: sum_j CV(j) * p_dc(j). Losses neglected.
template <typename Scalar, typename Derived>
VectorX<Scalar> apply_hvdc(const PtdfMatrix<Scalar>& ptdf, std::span<const BusPair> placements, const Eigen::MatrixBase<Derived>& p_dc) {
  if (static_cast<Eigen::Index>(placements.size()) != p_dc.size()) throw InputError("HVDC setpoint count does not match placements");
  if (placements.empty()) return VectorX<Scalar>::Zero(ptdf.num_lines());
  return cv_matrix(ptdf, placements) * p_dc;
}

// dP_L/dx for the reactance of `line_id`, evaluated analytically:
//   dB_L/dx * theta - PTDF * dB_B/dx * theta,  theta = B~^-1 * P_B.
template <typename Scalar>
VectorX<Scalar> tcsc_sensitivity(const Network& net, const InjectionProfile<Scalar>& inj, int line_id) {
  detail::require_connected(net);
  const Line& line = net.lines[net.line_index(line_id)];
  if (!line.in_service) throw InputError(fmt::format("line {} is out of service", line_id));
  auto sus = build_susceptance<Scalar>(net);
  if (inj.p.size() != sus.b_bus.rows()) throw InputError("injection profile length does not match the bus count");
  if (!inj.balanced()) throw InputError("unbalanced injection profile");

  const MatrixX<Scalar> inv = slack_inverse<Scalar>(sus.b_bus, sus.slack_index);
  MatrixX<Scalar> ptdf_values = sus.b_line * inv;
  ptdf_values.col(sus.slack_index).setZero();
  const VectorX<Scalar> theta = inv * inj.p;

  int row = -1;
  for (int r = 0; r < static_cast<int>(sus.line_ids.size()); ++r) {
    if (sus.line_ids[r] == line_id) row = r;
  }
  const int i = net.bus_index(line.from_bus);
  const int j = net.bus_index(line.to_bus);
  const Scalar x = static_cast<Scalar>(line.reactance);
  const Scalar db = Scalar(-1) / (x * x);  // d(1/x)/dx

  VectorX<Scalar> out = VectorX<Scalar>::Zero(sus.b_line.rows());
  out(row) += db * (theta(i) - theta(j));
  // dB_B/dx * theta is nonzero only at buses i and j.
  VectorX<Scalar> db_theta = VectorX<Scalar>::Zero(theta.size());
  db_theta(i) = db * (theta(i) - theta(j));
  db_theta(j) = -db * (theta(i) - theta(j));
  out -= ptdf_values * db_theta;
  return out;
}

template <typename Scalar = double>
struct LodfMatrix {
  MatrixX<Scalar> values;       // (l, k): share of line k's flow moved to l
  std::vector<bool> islanding;  // outage of line k splits the network
  std::vector<int> line_ids;
};

inline constexpr double kIslandingTolerance = 1e-9;

template <typename Scalar>
LodfMatrix<Scalar> lodf(const Network& net, const PtdfMatrix<Scalar>& ptdf) {
  const int nl = ptdf.num_lines();
  LodfMatrix<Scalar> out;
  out.values = MatrixX<Scalar>::Zero(nl, nl);
  out.islanding.assign(nl, false);
  out.line_ids = ptdf.line_ids;
  for (int k = 0; k < nl; ++k) {
    const Line& line = net.lines[net.line_index(ptdf.line_ids[k])];
    const VectorX<Scalar> transfer = ptdf.values.col(ptdf.column_of(line.from_bus)) - ptdf.values.col(ptdf.column_of(line.to_bus));
    const Scalar denom = Scalar(1) - transfer(k);
    if (std::abs(static_cast<double>(denom)) < kIslandingTolerance) {
      out.islanding[k] = true;
      out.values.col(k).setConstant(std::numeric_limits<Scalar>::quiet_NaN());
      continue;
    }
    out.values.col(k) = transfer / denom;
    out.values(k, k) = Scalar(-1);
  }
  return out;
}

template <typename Scalar = double>
LodfMatrix<Scalar> lodf(const Network& net) {
  return lodf(net, ptdf<Scalar>(net));
}

// Flows after line k (row index) trips, from pre-outage flows.
template <typename Scalar, typename Derived>
VectorX<Scalar> post_outage_flows(const LodfMatrix<Scalar>& lodf, const Eigen::MatrixBase<Derived>& flows, int k) {
  if (lodf.islanding[k]) throw TopologyError(fmt::format("outage of line {} islands the network", lodf.line_ids[k]));
  return flows + lodf.values.col(k) * flows(k);
}

// All unordered bus pairs (m < n by id), in lexicographic order.
template <typename Scalar>
std::vector<BusPair> all_pairs(const PtdfMatrix<Scalar>& ptdf) {
  std::vector<int> ids = ptdf.bus_ids;
  std::sort(ids.begin(), ids.end());
  std::vector<BusPair> out;
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) out.push_back({ids[a], ids[b]});
  }
  return out;
}

// Injection profile (per unit) from MW values keyed like Network::buses.
template <typename Scalar = double>
InjectionProfile<Scalar> injection_from_mw(const Network& net, std::span<const double> mw) {
  if (static_cast<int>(mw.size()) != net.num_buses()) throw InputError("injection profile length does not match the bus count");
  InjectionProfile<Scalar> out{VectorX<Scalar>(net.num_buses())};
  for (int i = 0; i < net.num_buses(); ++i) out.p(i) = static_cast<Scalar>(mw[i] / net.base_mva);
  return out;
}

}  // namespace gridctrl
