#pragma once

#include "ccpca/cpca.hpp"

#include <span>
#include <string>
#include <vector>

namespace ccpca {

/// sqrt(lambda) * v for the first contrastive component. Throws NumericalError when
/// lambda < 0: no direction has positive contrasted variance at this alpha.
Eigen::VectorXd loadings(const EigenPair<double>& pair);

/// Divides by the largest absolute entry; an all-zero vector is returned unchanged.
Eigen::VectorXd scale_column(const Eigen::VectorXd& w);

/// Cosine similarity; zero when either vector has zero length.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// sum over i != j of phi_i * phi_j * cos(dir_i, dir_j).
double sign_objective(std::span<const Eigen::VectorXd> dirs, std::span<const int> phi);

struct SignOptimization {
  std::vector<int> signs;
  /// Objective before any flip, then after each accepted flip.
  std::vector<double> objective_trace;
  /// Cluster indices in the order they were flipped.
  std::vector<int> flipped;
};

/// Greedy sign resolution starting from all +1: repeatedly take the not-yet-checked
/// cluster with the most negative row sum and flip it if that strictly raises the
/// objective. Each cluster is checked at most once.
SignOptimization optimize_signs(std::span<const Eigen::VectorXd> dirs);

/// Feature x cluster contributions, each column scaled to [-1, 1].
struct FCMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> feature_names;
  std::vector<int> cluster_ids;
  std::vector<int> signs;
};

/// Resolves signs across clusters on their loadings, applies them, then scales each column.
FCMatrix build_fc_matrix(std::span<const ContrastResult> results, std::vector<std::string> feature_names);

/// Display name of a cluster id: its number, or "Z" for noise.
std::string cluster_name(int cluster_id);

struct FeatureContribution {
  Eigen::Index feature = 0;
  std::string name;
  double value = 0.0;
};

/// The k features with the largest |FC| in one column; ties go to the lower feature index.
std::vector<FeatureContribution> top_features(const FCMatrix& fc, Eigen::Index column, Eigen::Index k);

}  // namespace ccpca
