#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ccpca {

/// Label used for DBSCAN noise / outliers; rendered as "Z".
inline constexpr int kNoiseLabel = -1;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Points x features table. Missing cells hold NaN in `points` and true in `missing_mask`.
struct DataTable {
  Eigen::MatrixXd points;
  std::vector<std::string> feature_names;
  std::vector<std::string> point_ids;
  BoolMatrix missing_mask;

  Eigen::Index rows() const { return points.rows(); }
  Eigen::Index cols() const { return points.cols(); }
  std::size_t missing_count() const;

  /// Throws InputError when shapes, names or ids are inconsistent.
  void validate() const;
};

/// A table together with its 2D embedding and cluster labels.
/// `coords2d` has zero rows when the embedding is absent; `labels` is empty
/// when the points have not been clustered yet.
struct EmbeddedDataset {
  DataTable table;
  Eigen::MatrixX2d coords2d;
  std::vector<int> labels;

  bool has_coords() const { return coords2d.rows() > 0; }
  bool has_labels() const { return !labels.empty(); }
  /// Number of non-noise clusters (labels are compact 0..l-1).
  int cluster_count() const;
  bool has_noise() const;
  /// Cluster ids in display order: 0..l-1, then the noise group if present.
  std::vector<int> analysis_clusters() const;

  void validate() const;
};

enum class TableFormat { csv, json };

struct LoadReport {
  std::size_t missing_cells = 0;
  /// Cells that were present but not parseable as numbers (counted as missing too).
  std::size_t malformed_cells = 0;
};

/// Parses delimiter-separated text. The header row names the features; a leading
/// column named "id" (any case) provides point ids, otherwise ids are row indices.
DataTable parse_delimited(std::string_view text, char delimiter = ',', LoadReport* report = nullptr);

DataTable load_table(const std::filesystem::path& source, TableFormat format,
                     LoadReport* report = nullptr);

/// Canonical JSON dataset bundle: {features, points, ids, coords2d?, labels?}.
EmbeddedDataset load_bundle(const std::filesystem::path& source);
void save_bundle(const EmbeddedDataset& dataset, const std::filesystem::path& target);

/// Drops features whose missing fraction is > feature_thresh, then points whose
/// missing fraction over the remaining features is > point_thresh.
DataTable filter_missing(const DataTable& table, double feature_thresh, double point_thresh);

/// Row-subset of an embedded dataset following a table filter; keeps coords and labels aligned.
EmbeddedDataset filter_missing(const EmbeddedDataset& dataset, double feature_thresh,
                               double point_thresh);

/// Replaces missing cells by the mean of the observed cells of their feature.
DataTable impute_mean(const DataTable& table);

/// Z-scores each feature (population standard deviation). Constant features become 0.
DataTable standardize(const DataTable& table);

/// Parses a missing-value token: empty, "NA" or "NaN" (any case).
bool is_missing_token(std::string_view cell);

}  // namespace ccpca
