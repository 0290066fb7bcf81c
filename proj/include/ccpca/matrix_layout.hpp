#pragma once

#include "ccpca/contributions.hpp"

#include <string>
#include <vector>

namespace ccpca {

/// One agglomeration step. Node ids below the leaf count are leaves; the k-th merge
/// creates node leaf_count + k.
struct Merge {
  Eigen::Index left = 0;
  Eigen::Index right = 0;
  double height = 0.0;
  Eigen::Index size = 0;
};

struct Dendrogram {
  Eigen::Index leaf_count = 0;
  std::vector<Merge> merges;

  /// Leaves of `node` in left-to-right order without any flips.
  std::vector<Eigen::Index> leaves(Eigen::Index node) const;
  Eigen::Index root() const { return leaf_count + static_cast<Eigen::Index>(merges.size()) - 1; }
};

/// Euclidean distances between the rows of `vectors`.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& vectors);

/// Complete-linkage agglomerative clustering of the rows of `vectors` (Euclidean).
/// Ties merge the pair whose smallest leaf indices are lexicographically smallest.
Dendrogram linkage_complete(const Eigen::MatrixXd& vectors);

/// Leaf order minimizing the sum of adjacent-leaf distances over all subtree flips
/// (dynamic program over subtree end points). Ties resolve to the lexicographically
/// smallest permutation.
std::vector<Eigen::Index> optimal_leaf_order(const Dendrogram& dendrogram, const Eigen::MatrixXd& dist);

/// Sum of dist(order[i], order[i+1]).
double adjacent_cost(const std::vector<Eigen::Index>& order, const Eigen::MatrixXd& dist);

/// Applies the first leaf_count - groups merges; returns a group id per leaf,
/// numbered in order of first appearance along `leaf_order`.
std::vector<int> cut_tree(const Dendrogram& dendrogram, Eigen::Index groups,
                          const std::vector<Eigen::Index>& leaf_order);

enum class AggregationMode { max_abs, mean };

AggregationMode parse_aggregation_mode(const std::string& text);
std::string to_string(AggregationMode mode);

struct FeatureGroup {
  std::vector<Eigen::Index> members;  // in display order
  Eigen::Index representative = 0;
  std::string representative_name;
  std::string display_label;          // "<name>" or "<name>, k more"
  Eigen::VectorXd values;             // one per cluster, original column order
};

struct LayoutResult {
  std::vector<Eigen::Index> row_perm;
  std::vector<Eigen::Index> col_perm;
  Dendrogram row_dendrogram;
  Dendrogram col_dendrogram;
  std::vector<FeatureGroup> groups;   // in display order
  bool aggregated = false;
};

/// Reorders rows and columns (complete linkage + optimal leaf ordering) and, when
/// the feature count exceeds delta, aggregates rows into delta dendrogram groups.
LayoutResult layout(const FCMatrix& fc, int delta = 40, AggregationMode mode = AggregationMode::max_abs);

/// Aggregate of one group's cells for one cluster. max_abs keeps the signed value of
/// largest magnitude (positive on ties).
double aggregate(std::span<const double> cells, AggregationMode mode);

}  // namespace ccpca
