#pragma once

#include "ccpca/dataset.hpp"

#include <vector>

namespace ccpca {

struct ClusterParams {
  double eps = 0.0;
  int min_pts = 1;

  void validate() const;
};

/// DBSCAN over 2D points. A core point has at least min_pts points (itself included)
/// within distance eps. Points are scanned in ascending index order; a border point
/// joins the first cluster that reaches it. Labels are compact in discovery order,
/// noise is kNoiseLabel.
std::vector<int> dbscan(const Eigen::MatrixX2d& coords, const ClusterParams& params);

/// Moves the selected points into a new cluster with the next unused label. Clusters
/// emptied by the move are dropped and the remaining labels renumbered in order.
EmbeddedDataset add_manual_cluster(const EmbeddedDataset& dataset, const std::vector<Eigen::Index>& point_indices);

/// Renumbers non-noise labels to 0..l-1 preserving their relative order.
std::vector<int> compact_labels(std::vector<int> labels);

}  // namespace ccpca
