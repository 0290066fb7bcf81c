#include "ccpca/analysis.hpp"

#include <algorithm>

namespace ccpca {

EmbeddedDataset preprocess(EmbeddedDataset dataset, const AnalysisOptions& options) {
  dataset.validate();
  if (options.filter) dataset = filter_missing(dataset, options.filter->feature_thresh, options.filter->point_thresh);
  if (dataset.table.missing_count() > 0) dataset.table = impute_mean(dataset.table);
  if (options.standardize) dataset.table = standardize(dataset.table);
  return dataset;
}

AnalysisResult analyze_labeled(EmbeddedDataset dataset, const AnalysisOptions& options) {
  if (!dataset.has_labels()) throw InputError("dataset has no cluster labels");
  dataset.validate();
  const auto grid = alpha_grid(options.q, options.alpha_min, options.alpha_max);
  const auto ids = dataset.analysis_clusters();
  if (ids.empty()) throw InputError("dataset has no clusters");

  AnalysisResult result;
  std::vector<ContrastResult> fits;
  for (int id : ids) {
    ClusterAnalysis ca;
    ca.cluster_id = id;
    ca.size = static_cast<std::size_t>(std::count(dataset.labels.begin(), dataset.labels.end(), id));
    ca.scan = select_alpha(dataset, id, grid, options.gamma, options.threads);
    ca.fit = ccpca_fit(dataset, id, ca.scan.chosen().alpha);
    fits.push_back(ca.fit);
    result.clusters.push_back(std::move(ca));
  }
  result.fc = build_fc_matrix(fits, dataset.table.feature_names);
  result.layout = layout(result.fc, options.delta, options.aggregation);
  for (std::size_t c = 0; c < result.clusters.size(); ++c) {
    result.clusters[c].top = top_features(result.fc, static_cast<Eigen::Index>(c), options.top_k);
  }
  result.dataset = std::move(dataset);
  return result;
}

AnalysisResult analyze(EmbeddedDataset dataset, const AnalysisOptions& options) {
  dataset = preprocess(std::move(dataset), options);
  if (options.clustering) {
    if (!dataset.has_coords()) throw InputError("DBSCAN parameters given but the dataset has no coords2d");
    dataset.labels = dbscan(dataset.coords2d, *options.clustering);
  } else if (!dataset.has_labels()) {
    throw InputError("dataset has no labels; DBSCAN parameters (--eps, --min-pts) are required");
  }
  return analyze_labeled(std::move(dataset), options);
}

Json options_json(const AnalysisOptions& o) {
  Json out;
  out["gamma"] = o.gamma;
  out["q"] = o.q;
  out["alpha_min"] = o.alpha_min;
  out["alpha_max"] = o.alpha_max;
  out["delta"] = o.delta;
  out["agg"] = to_string(o.aggregation);
  out["top_k"] = o.top_k;
  out["standardize"] = o.standardize;
  if (o.filter) out["filter"] = {{"features", o.filter->feature_thresh}, {"points", o.filter->point_thresh}};
  if (o.clustering) out["dbscan"] = {{"eps", o.clustering->eps}, {"min_pts", o.clustering->min_pts}};
  return out;
}

Json to_json(const AnalysisResult& result, const AnalysisOptions& options) {
  Json out;
  out["params"] = options_json(options);
  out["points"] = result.dataset.table.rows();
  out["features"] = result.dataset.table.feature_names;
  out["labels"] = labels_json(result.dataset.labels);
  out["clusters"] = Json::array();
  for (const auto& c : result.clusters) {
    Json entry;
    entry["cluster"] = c.cluster_id;
    entry["name"] = cluster_name(c.cluster_id);
    entry["size"] = c.size;
    entry["alpha"] = number_json(c.fit.alpha);
    entry["D"] = number_json(c.scan.chosen().discrepancy);
    entry["V"] = number_json(c.scan.chosen().variance);
    entry["alpha_scan"] = to_json(c.scan);
    entry["contrast"] = to_json(c.fit);
    entry["top_features"] = Json::array();
    for (const auto& t : c.top) entry["top_features"].push_back({{"feature", t.name}, {"fc", number_json(t.value)}});
    out["clusters"].push_back(std::move(entry));
  }
  out["fc_matrix"] = to_json(result.fc);
  out["layout"] = to_json(result.layout);
  return out;
}

HistogramPair histogram_pair(std::span<const double> cluster_values, std::span<const double> other_values) {
  if (cluster_values.empty() || other_values.empty()) throw InputError("histogram_pair: both samples must be non-empty");
  HistogramPair pair;
  pair.bins = shared_bins(cluster_values, other_values);
  pair.cluster_counts = histogram(cluster_values, pair.bins).counts;
  pair.others_counts = histogram(other_values, pair.bins).counts;
  auto relative = [](const std::vector<long>& counts, std::size_t total) {
    std::vector<double> out;
    for (long c : counts) out.push_back(static_cast<double>(c) / static_cast<double>(total));
    return out;
  };
  pair.cluster_rel_freq = relative(pair.cluster_counts, cluster_values.size());
  pair.others_rel_freq = relative(pair.others_counts, other_values.size());
  pair.y_max = std::max(*std::max_element(pair.cluster_rel_freq.begin(), pair.cluster_rel_freq.end()),
                        *std::max_element(pair.others_rel_freq.begin(), pair.others_rel_freq.end()));
  return pair;
}

Json to_json(const HistogramPair& pair) {
  Json out;
  out["bins"] = {{"start", pair.bins.start}, {"width", pair.bins.width}, {"count", pair.bins.count}};
  out["cluster_counts"] = pair.cluster_counts;
  out["others_counts"] = pair.others_counts;
  out["cluster_rel_freq"] = pair.cluster_rel_freq;
  out["others_rel_freq"] = pair.others_rel_freq;
  out["y_max"] = pair.y_max;
  return out;
}

namespace {

HistogramPair split_histogram(const Eigen::VectorXd& values, const std::vector<bool>& mask) {
  std::vector<double> in;
  std::vector<double> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) (mask[static_cast<std::size_t>(i)] ? in : out).push_back(values(i));
  return histogram_pair(in, out);
}

}  // namespace

HistogramPair feature_histogram(const EmbeddedDataset& dataset, Eigen::Index feature, int cluster_id) {
  if (feature < 0 || feature >= dataset.table.cols()) throw InputError("unknown feature index " + std::to_string(feature));
  return split_histogram(dataset.table.points.col(feature), cluster_mask(dataset, cluster_id));
}

HistogramPair projection_histogram(const EmbeddedDataset& dataset, const ContrastResult& fit) {
  const auto mask = cluster_mask(dataset, fit.cluster_id);
  const Eigen::VectorXd center = dataset.table.points.colwise().mean().transpose();
  const Eigen::VectorXd proj = (dataset.table.points.rowwise() - center.transpose()) * fit.components.front().vector;
  return split_histogram(proj, mask);
}

}  // namespace ccpca
