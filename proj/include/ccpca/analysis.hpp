#pragma once

#include "ccpca/alpha_select.hpp"
#include "ccpca/clustering.hpp"
#include "ccpca/contributions.hpp"
#include "ccpca/matrix_layout.hpp"
#include "ccpca/serialization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ccpca {

struct MissingFilter {
  double feature_thresh = 1.0;
  double point_thresh = 1.0;
};

/// Every knob of the batch pipeline. Defaults follow the method's published defaults.
struct AnalysisOptions {
  std::optional<MissingFilter> filter;
  bool standardize = false;
  std::optional<ClusterParams> clustering;  // used when the dataset has no labels
  double gamma = 0.5;
  int q = 40;
  double alpha_min = 0.1;
  double alpha_max = 1000.0;
  int delta = 40;
  AggregationMode aggregation = AggregationMode::max_abs;
  int top_k = 3;
  unsigned threads = 1;
};

struct ClusterAnalysis {
  int cluster_id = 0;
  std::size_t size = 0;
  AlphaScan scan;
  ContrastResult fit;
  std::vector<FeatureContribution> top;
};

struct AnalysisResult {
  EmbeddedDataset dataset;  // after preprocessing and clustering
  std::vector<ClusterAnalysis> clusters;
  FCMatrix fc;
  LayoutResult layout;
};

/// Missing-value filtering, imputation and optional standardization.
EmbeddedDataset preprocess(EmbeddedDataset dataset, const AnalysisOptions& options);

/// Contrast analysis of every cluster (and the noise group) of a labeled, imputed dataset.
AnalysisResult analyze_labeled(EmbeddedDataset dataset, const AnalysisOptions& options);

/// Full pipeline: preprocess, DBSCAN on coords2d when clustering parameters are set
/// (otherwise the dataset's labels are used), then analyze_labeled.
AnalysisResult analyze(EmbeddedDataset dataset, const AnalysisOptions& options);

Json to_json(const AnalysisResult& result, const AnalysisOptions& options);
Json options_json(const AnalysisOptions& options);

/// Histograms of one sample against another over shared Scott bins, as relative frequencies.
struct HistogramPair {
  BinSpec bins;
  std::vector<double> cluster_rel_freq;
  std::vector<double> others_rel_freq;
  std::vector<long> cluster_counts;
  std::vector<long> others_counts;
  double y_max = 0.0;
};

HistogramPair histogram_pair(std::span<const double> cluster_values, std::span<const double> other_values);
Json to_json(const HistogramPair& pair);

/// Histogram pair of one feature column split by cluster membership.
HistogramPair feature_histogram(const EmbeddedDataset& dataset, Eigen::Index feature, int cluster_id);

/// Projection on the first component of a fitted cluster, as a histogram pair.
HistogramPair projection_histogram(const EmbeddedDataset& dataset, const ContrastResult& fit);

}  // namespace ccpca
