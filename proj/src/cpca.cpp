#include "ccpca/cpca.hpp"

#include "ccpca/contributions.hpp"

namespace ccpca {

std::vector<bool> cluster_mask(const EmbeddedDataset& dataset, int cluster_id) {
  if (!dataset.has_labels()) throw InputError("dataset has no cluster labels");
  if (cluster_id < kNoiseLabel || cluster_id >= dataset.cluster_count()) {
    throw InputError("unknown cluster id " + std::to_string(cluster_id));
  }
  std::vector<bool> mask(dataset.labels.size());
  std::size_t members = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = dataset.labels[i] == cluster_id;
    members += mask[i] ? 1 : 0;
  }
  if (members == 0) throw InputError("cluster " + std::to_string(cluster_id) + " is empty");
  if (members == mask.size()) {
    throw InputError("complement empty: cluster " + std::to_string(cluster_id) + " covers the whole dataset");
  }
  return mask;
}

ContrastCovariances contrast_covariances(const Eigen::MatrixXd& points, const std::vector<bool>& in_cluster) {
  const Eigen::VectorXd center = points.colwise().mean().transpose();
  Eigen::Index complement_rows = 0;
  for (bool b : in_cluster) complement_rows += b ? 0 : 1;
  Eigen::MatrixXd complement(complement_rows, points.cols());
  for (Eigen::Index i = 0, r = 0; i < points.rows(); ++i) {
    if (!in_cluster[static_cast<std::size_t>(i)]) complement.row(r++) = points.row(i);
  }
  return {covariance(points, center), covariance(complement, center)};
}

ContrastResult ccpca_fit(const EmbeddedDataset& dataset, int cluster_id, double alpha, Eigen::Index components) {
  if (dataset.table.missing_count() > 0) throw InputError("ccpca_fit requires imputed data");
  const auto mask = cluster_mask(dataset, cluster_id);
  const auto cov = contrast_covariances(dataset.table.points, mask);
  if (components < 1 || components > 2) throw InputError("ccpca_fit: components must be 1 or 2");
  const auto k = std::min<Eigen::Index>(components, dataset.table.cols());

  ContrastResult result;
  result.cluster_id = cluster_id;
  result.alpha = alpha;
  result.components = top_eigs(contrast_matrix(cov.entire, cov.complement, alpha), k);
  result.loadings = loadings(result.components.front());
  return result;
}

}  // namespace ccpca
