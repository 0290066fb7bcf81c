#pragma once

#include "ccpca/dataset.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path data_dir() { return CCPCA_TEST_DATA_DIR; }

/// Dataset with generated feature names f0.. and the given labels.
inline ccpca::EmbeddedDataset make_dataset(const Eigen::MatrixXd& points, std::vector<int> labels = {}) {
  ccpca::EmbeddedDataset ds;
  ds.table.points = points;
  ds.table.missing_mask = ccpca::BoolMatrix::Constant(points.rows(), points.cols(), false);
  for (Eigen::Index j = 0; j < points.cols(); ++j) ds.table.feature_names.push_back("f" + std::to_string(j));
  for (Eigen::Index i = 0; i < points.rows(); ++i) ds.table.point_ids.push_back(std::to_string(i));
  ds.labels = std::move(labels);
  return ds;
}

/// Two Gaussian groups that differ only in feature 0 (offset `shift`); the other
/// features are shared noise with larger spread. Group 0 is the first `a` rows.
inline ccpca::EmbeddedDataset separable_in_one_feature(std::mt19937_64& rng, Eigen::Index a, Eigen::Index b,
                                                      Eigen::Index d = 10, double shift = 3.0,
                                                      double noise = 2.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(a + b, d);
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < a + b; ++i) {
    const bool first = i < a;
    labels.push_back(first ? 0 : 1);
    x(i, 0) = normal(rng) * 0.5 + (first ? shift : 0.0);
    for (Eigen::Index j = 1; j < d; ++j) x(i, j) = normal(rng) * noise;
  }
  return make_dataset(x, labels);
}

/// Two 2D Gaussian blobs plus uniform outliers.
inline Eigen::MatrixX2d blobs(std::mt19937_64& rng, Eigen::Index per_blob, double sigma, double gap,
                              Eigen::Index outliers) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::uniform_real_distribution<double> uniform(-gap, 2.0 * gap);
  Eigen::MatrixX2d c(2 * per_blob + outliers, 2);
  for (Eigen::Index i = 0; i < 2 * per_blob; ++i) {
    const double cx = i < per_blob ? 0.0 : gap;
    c(i, 0) = cx + normal(rng);
    c(i, 1) = normal(rng);
  }
  for (Eigen::Index i = 2 * per_blob; i < c.rows(); ++i) {
    c(i, 0) = uniform(rng);
    c(i, 1) = uniform(rng) + 3.0 * gap;
  }
  return c;
}

}  // namespace fixtures
