#pragma once

// Controller placement by conical-hull volume of controllability vectors.
//
// A vector c in n_L dimensions spans, together with the origin, the simplex
// {0, c_1 e_1, ..., c_n e_n}. Its volume is prod|c_i| / n_L!, which underflows
// quickly, so scores are kept as sums of logs with the common n_L! dropped.
// Components at or below epsilon are clamped to epsilon and not counted in
// `dimension`; comparisons look at dimension first.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gridctrl/dcsens.hpp"

namespace gridctrl {

inline constexpr double kVolumeEpsilon = 1e-9;

struct VolumeScore {
  double log_volume = -std::numeric_limits<double>::infinity();
  int dimension = 0;

  std::partial_ordering operator<=>(const VolumeScore& other) const {
    if (auto c = dimension <=> other.dimension; c != 0) return c;
    return log_volume <=> other.log_volume;
  }
  bool operator==(const VolumeScore&) const = default;
};

template <typename Derived>
VolumeScore conical_log_volume(const Eigen::MatrixBase<Derived>& v, double eps = kVolumeEpsilon) {
  VolumeScore out{0.0, 0};
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(static_cast<double>(v(i)));
    if (a > eps) ++out.dimension;
    out.log_volume += std::log(std::max(a, eps));
  }
  return out;
}

// cos(phi) between v and span(basis): |P_A v| / |v|, P_A the orthogonal
// projector onto the columns of `basis`. Throws for a rank-deficient basis or
// a zero v.
template <typename Scalar>
double orthogonality(const MatrixX<Scalar>& basis, const VectorX<Scalar>& v) {
  const double vnorm = static_cast<double>(v.norm());
  if (!(vnorm > 0.0)) throw InputError("orthogonality of a zero vector");
  if (basis.cols() == 0) return 0.0;
  if (numerical_rank(basis) < basis.cols()) throw InputError("orthogonality basis is rank deficient");
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(basis);
  const MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(basis.rows(), basis.cols());
  const VectorX<Scalar> proj = q * (q.transpose() * v);
  return std::clamp(static_cast<double>(proj.norm()) / vnorm, 0.0, 1.0);
}

// Sum over orthants of the conical volumes spanned by the componentwise
// extremes of every nonzero {-1,0,+1} combination of the given vectors.
// The result's dimension is the largest orthant dimension, and its
// log_volume the log of the summed volumes of the orthants reaching it
// (lower-dimensional orthant hulls have zero volume in that measure).
// Vectors equal to an earlier one up to sign add no direction and are
// dropped before the combinations are formed.
template <typename Scalar>
VolumeScore orthant_volume_sum(std::span<const VectorX<Scalar>> selected, const VectorX<Scalar>& candidate, double eps = kVolumeEpsilon) {
  std::vector<VectorX<Scalar>> gens;
  auto duplicate = [&](const VectorX<Scalar>& v) {
    for (const auto& g : gens) {
      const double scale = std::max(1.0, static_cast<double>(g.cwiseAbs().maxCoeff()));
      if (static_cast<double>((g - v).cwiseAbs().maxCoeff()) <= 1e-12 * scale) return true;
      if (static_cast<double>((g + v).cwiseAbs().maxCoeff()) <= 1e-12 * scale) return true;
    }
    return false;
  };
  for (const auto& s : selected) {
    if (!duplicate(s)) gens.push_back(s);
  }
  if (!duplicate(candidate)) gens.push_back(candidate);
  if (gens.empty()) return {};

  const Eigen::Index n = gens.front().size();
  const std::size_t k = gens.size();
  const std::size_t words = static_cast<std::size_t>((n + 63) / 64);
  std::map<std::vector<std::uint64_t>, Eigen::VectorXd> extremes;

  std::vector<int> coef(k, -1);
  VectorX<Scalar> column(n);
  std::vector<std::uint64_t> key(words);
  while (true) {
    bool nonzero = false;
    column.setZero();
    for (std::size_t g = 0; g < k; ++g) {
      if (coef[g] == 0) continue;
      nonzero = true;
      if (coef[g] > 0) {
        column += gens[g];
      } else {
        column -= gens[g];
      }
    }
    if (nonzero) {
      std::fill(key.begin(), key.end(), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (column(i) < Scalar(0)) key[i / 64] |= std::uint64_t{1} << (i % 64);
      }
      auto [it, inserted] = extremes.try_emplace(key, Eigen::VectorXd::Zero(n));
      for (Eigen::Index i = 0; i < n; ++i) it->second(i) = std::max(it->second(i), std::abs(static_cast<double>(column(i))));
    }
    // Next {-1,0,+1}^k combination, odometer style.
    std::size_t pos = 0;
    while (pos < k && coef[pos] == 1) coef[pos++] = -1;
    if (pos == k) break;
    ++coef[pos];
  }

  std::vector<VolumeScore> scores;
  int top = 0;
  for (const auto& [orthant, ext] : extremes) {
    scores.push_back(conical_log_volume(ext, eps));
    top = std::max(top, scores.back().dimension);
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) {
    if (s.dimension == top) peak = std::max(peak, s.log_volume);
  }
  double acc = 0.0;
  for (const auto& s : scores) {
    if (s.dimension == top) acc += std::exp(s.log_volume - peak);
  }
  return {peak + std::log(acc), top};
}

struct ScoredPair {
  BusPair pair;
  VolumeScore score;
};

// Every bus pair scored by the conical volume of its own CV, best first;
// ties go to the lexicographically smaller pair.
std::vector<ScoredPair> first_placement(const PtdfMatrix<double>& ptdf, double eps = kVolumeEpsilon);

struct PlacementState {
  std::vector<BusPair> selected;
  Eigen::MatrixXd basis;  // n_L x |selected|, CVs of `selected` in order
  double cos_threshold = 0.2;
  int candidate_cap = 10;
  double epsilon = kVolumeEpsilon;
};

struct CandidateRow {
  BusPair pair;
  std::optional<double> cosphi;  // empty for the first placement
  VolumeScore score;
  bool selected = false;
};

struct PlacementStep {
  BusPair chosen;
  std::vector<CandidateRow> table;  // scored candidates, ranked best first
};

// Adds the first placement to an empty state.
PlacementStep place_first(PlacementState& state, const PtdfMatrix<double>& ptdf);

// One greedy step after the first: filter by cos(phi), score the survivors
// by orthant volume, append the winner to `state`.
PlacementStep place_next(PlacementState& state, const PtdfMatrix<double>& ptdf);

struct CvPlacementOptions {
  double cos_threshold = 0.2;
  int candidate_cap = 10;
  double epsilon = kVolumeEpsilon;
};

struct CvPlacementResult {
  std::vector<PlacementStep> steps;

  std::vector<BusPair> placements() const {
    std::vector<BusPair> out;
    for (const auto& s : steps) out.push_back(s.chosen);
    return out;
  }
};

CvPlacementResult place_cv(const PtdfMatrix<double>& ptdf, int count, const CvPlacementOptions& options = {});

struct NormRank {
  BusPair pair;
  double norm1 = 0.0;
};

// All pairs by descending |CV|_1 (ties lexicographic).
std::vector<NormRank> rank_by_norm1(const PtdfMatrix<double>& ptdf);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct MetricComparison {
  std::vector<BusPair> pairs;  // lexicographic
  std::vector<double> norm1;
  std::vector<VolumeScore> volume;
  double rho = 0.0;  // Spearman correlation of norm1 vs log volume
};

MetricComparison compare_metrics(const PtdfMatrix<double>& ptdf, double eps = kVolumeEpsilon);

}  // namespace gridctrl
