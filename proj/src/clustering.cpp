#include "ccpca/clustering.hpp"

#include "ccpca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace ccpca {

void ClusterParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("DBSCAN eps must be a positive finite number");
  if (min_pts < 1) throw InputError("DBSCAN min_pts must be at least 1");
}

namespace {

// Uniform grid with cell size eps; a radius query visits the 3x3 surrounding cells.
class GridIndex {
 public:
  GridIndex(const Eigen::MatrixX2d& coords, double eps) : coords_(coords), eps_(eps) {
    const Eigen::RowVector2d lo = coords.colwise().minCoeff();
    origin_ = lo;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) cells_[key(cell_of(i))].push_back(i);
  }

  // Neighbors within eps (inclusive), ascending by index.
  void query(Eigen::Index i, std::vector<Eigen::Index>& out) const {
    out.clear();
    const auto c = cell_of(i);
    const double eps2 = eps_ * eps_;
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key({c.first + dx, c.second + dy}));
        if (it == cells_.end()) continue;
        for (auto j : it->second) {
          if ((coords_.row(i) - coords_.row(j)).squaredNorm() <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::pair<long, long> cell_of(Eigen::Index i) const {
    return {static_cast<long>(std::floor((coords_(i, 0) - origin_(0)) / eps_)),
            static_cast<long>(std::floor((coords_(i, 1) - origin_(1)) / eps_))};
  }
  static std::uint64_t key(std::pair<long, long> c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.first)) << 32) |
           static_cast<std::uint32_t>(c.second);
  }

  const Eigen::MatrixX2d& coords_;
  double eps_;
  Eigen::RowVector2d origin_;
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> cells_;
};

}  // namespace

std::vector<int> dbscan(const Eigen::MatrixX2d& coords, const ClusterParams& params) {
  params.validate();
  const auto n = coords.rows();
  if (n < 1) throw InputError("dbscan needs at least one point");
  if (!coords.allFinite()) throw InputError("dbscan coordinates must be finite");

  constexpr int kUnvisited = -2;
  std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
  const GridIndex index(coords, params.eps);
  std::vector<Eigen::Index> neighbors;
  std::vector<Eigen::Index> frontier;
  int next_cluster = 0;

  for (Eigen::Index p = 0; p < n; ++p) {
    if (labels[static_cast<std::size_t>(p)] != kUnvisited) continue;
    index.query(p, neighbors);
    if (static_cast<int>(neighbors.size()) < params.min_pts) {
      labels[static_cast<std::size_t>(p)] = kNoiseLabel;
      continue;
    }
    const int cluster = next_cluster++;
    labels[static_cast<std::size_t>(p)] = cluster;
    frontier.assign(neighbors.begin(), neighbors.end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const auto q = frontier[f];
      auto& lq = labels[static_cast<std::size_t>(q)];
      if (lq == kNoiseLabel) lq = cluster;  // border point
      if (lq != kUnvisited) continue;
      lq = cluster;
      index.query(q, neighbors);
      if (static_cast<int>(neighbors.size()) >= params.min_pts) {
        frontier.insert(frontier.end(), neighbors.begin(), neighbors.end());
      }
    }
  }
  return labels;
}

std::vector<int> compact_labels(std::vector<int> labels) {
  std::map<int, int> remap;
  for (int l : labels) if (l >= 0) remap.emplace(l, 0);
  int next = 0;
  for (auto& [from, to] : remap) to = next++;
  for (int& l : labels) if (l >= 0) l = remap.at(l);
  return labels;
}

EmbeddedDataset add_manual_cluster(const EmbeddedDataset& dataset, const std::vector<Eigen::Index>& point_indices) {
  if (point_indices.empty()) throw InputError("add_manual_cluster: empty selection");
  const auto n = dataset.table.rows();
  EmbeddedDataset out = dataset;
  if (!out.has_labels()) out.labels.assign(static_cast<std::size_t>(n), kNoiseLabel);
  for (auto i : point_indices) {
    if (i < 0 || i >= n) throw InputError("add_manual_cluster: point index " + std::to_string(i) + " out of range");
  }
  // Use a label above every existing one, then compact; the new cluster ends up last.
  const int fresh = std::max(out.cluster_count(), 0) + static_cast<int>(n) + 1;
  for (auto i : point_indices) out.labels[static_cast<std::size_t>(i)] = fresh;
  out.labels = compact_labels(std::move(out.labels));
  return out;
}

}  // namespace ccpca
