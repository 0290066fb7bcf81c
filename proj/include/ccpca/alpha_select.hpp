#pragma once

#include "ccpca/cpca.hpp"

#include <span>
#include <vector>

namespace ccpca {

/// Contrast-parameter candidates: 0 followed by log-spaced values.
struct AlphaGrid {
  std::vector<double> values;
  double log_min = 0.0;
  double log_max = 0.0;
};

/// q candidates: 0, then q-1 values log-spaced from min to max inclusive.
AlphaGrid alpha_grid(int q = 40, double min = 0.1, double max = 1000.0);

/// Bins shared by two samples, sized by Scott's normal reference rule on their union.
struct BinSpec {
  double start = 0.0;
  double width = 1.0;
  Eigen::Index count = 1;
};

struct Histogram {
  double bin_start = 0.0;
  double bin_width = 1.0;
  std::vector<long> counts;
};

inline constexpr Eigen::Index kMaxBins = 10000;
inline constexpr double kScottFactor = 3.49;

/// width = 3.49 * sigma * N^(-1/3) over the N combined values (population sigma);
/// bins cover [min, max]. A zero spread or degenerate width gives one bin.
BinSpec shared_bins(std::span<const double> a, std::span<const double> b);

/// Bin index floor((x - start) / width), clamped into [0, count).
Histogram histogram(std::span<const double> values, const BinSpec& bins);

/// sum_j min(hA_j, hB_j) over the shared bins.
long histogram_intersection(std::span<const double> a, std::span<const double> b);

/// 1 / I(K', R'); +infinity when the histograms do not overlap.
double discrepancy(std::span<const double> cluster_proj, std::span<const double> rest_proj);

/// Population variance of the cluster projection after min-max scaling by the union's range.
double scaled_variance(std::span<const double> cluster_proj, std::span<const double> rest_proj);

struct AlphaCandidate {
  double alpha = 0.0;
  double discrepancy = 0.0;
  double variance = 0.0;
  EigenPair<double> first;
};

struct AlphaScan {
  std::vector<AlphaCandidate> candidates;
  std::size_t chosen_index = 0;
  double gamma = 0.5;
  bool fallback = false;

  const AlphaCandidate& chosen() const { return candidates.at(chosen_index); }
};

/// Evaluates one candidate: fit, project every point on the first component, split, score.
AlphaCandidate evaluate_alpha(const Eigen::MatrixXd& points, const std::vector<bool>& in_cluster,
                              const ContrastCovariances& cov, double alpha);

/// Picks the feasible candidate with the largest discrepancy (smallest alpha on ties).
/// Feasible: V >= gamma * V(alpha_1) and a non-negative top eigenvalue.
/// With no feasible candidate, falls back to the first one and sets `fallback`.
std::size_t choose_alpha(std::span<const AlphaCandidate> candidates, double gamma, bool* fallback = nullptr);

/// Full scan for one cluster. Candidates are evaluated on `threads` workers and
/// gathered by index, so the result does not depend on the thread count.
AlphaScan select_alpha(const EmbeddedDataset& dataset, int cluster_id, const AlphaGrid& grid,
                       double gamma = 0.5, unsigned threads = 1);

}  // namespace ccpca
