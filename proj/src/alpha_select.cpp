#include "ccpca/alpha_select.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace ccpca {

AlphaGrid alpha_grid(int q, double min, double max) {
  if (q < 2) throw InputError("alpha grid needs at least 2 candidates");
  if (!(min > 0.0) || !(max > min) || !std::isfinite(max)) {
    throw InputError("alpha grid range must satisfy 0 < min < max");
  }
  AlphaGrid grid;
  grid.log_min = std::log10(min);
  grid.log_max = std::log10(max);
  grid.values.push_back(0.0);
  const int logs = q - 1;
  for (int i = 0; i < logs; ++i) {
    if (i == logs - 1) {
      grid.values.push_back(max);
    } else if (i == 0) {
      grid.values.push_back(min);
    } else {
      const double t = static_cast<double>(i) / static_cast<double>(logs - 1);
      grid.values.push_back(std::pow(10.0, grid.log_min + t * (grid.log_max - grid.log_min)));
    }
  }
  return grid;
}

namespace {

struct Extent {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Extent extent(std::span<const double> a, std::span<const double> b) {
  Extent e;
  double sum = 0.0;
  for (auto s : {a, b}) {
    for (double x : s) {
      e.min = std::min(e.min, x);
      e.max = std::max(e.max, x);
      sum += x;
    }
  }
  e.n = a.size() + b.size();
  if (e.n == 0) return e;
  e.mean = sum / static_cast<double>(e.n);
  double ss = 0.0;
  for (auto s : {a, b}) {
    for (double x : s) ss += (x - e.mean) * (x - e.mean);
  }
  e.sd = std::sqrt(ss / static_cast<double>(e.n));
  return e;
}

}  // namespace

BinSpec shared_bins(std::span<const double> a, std::span<const double> b) {
  const auto e = extent(a, b);
  if (e.n == 0) throw InputError("shared_bins: combined set is empty");
  BinSpec bins;
  bins.start = e.min;
  const double width = kScottFactor * e.sd * std::pow(static_cast<double>(e.n), -1.0 / 3.0);
  const double span = e.max - e.min;
  if (!(e.sd > 0.0) || !(width > 0.0) || !(span > 0.0) || !std::isfinite(span / width)) {
    bins.width = span > 0.0 ? span : 1.0;
    bins.count = 1;
    return bins;
  }
  const double count = std::ceil(span / width);
  if (count > static_cast<double>(kMaxBins)) {
    bins.count = kMaxBins;
    bins.width = span / static_cast<double>(kMaxBins);
  } else {
    bins.count = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(count));
    bins.width = width;
  }
  return bins;
}

Histogram histogram(std::span<const double> values, const BinSpec& bins) {
  Histogram h;
  h.bin_start = bins.start;
  h.bin_width = bins.width;
  h.counts.assign(static_cast<std::size_t>(bins.count), 0);
  for (double x : values) {
    double idx = std::floor((x - bins.start) / bins.width);
    idx = std::clamp(idx, 0.0, static_cast<double>(bins.count - 1));
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

long histogram_intersection(std::span<const double> a, std::span<const double> b) {
  const auto bins = shared_bins(a, b);
  const auto ha = histogram(a, bins);
  const auto hb = histogram(b, bins);
  long total = 0;
  for (std::size_t j = 0; j < ha.counts.size(); ++j) total += std::min(ha.counts[j], hb.counts[j]);
  return total;
}

double discrepancy(std::span<const double> cluster_proj, std::span<const double> rest_proj) {
  if (cluster_proj.empty() || rest_proj.empty()) throw InputError("discrepancy: both projections must be non-empty");
  const long overlap = histogram_intersection(cluster_proj, rest_proj);
  if (overlap == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / static_cast<double>(overlap);
}

double scaled_variance(std::span<const double> cluster_proj, std::span<const double> rest_proj) {
  if (cluster_proj.empty()) return 0.0;
  const auto e = extent(cluster_proj, rest_proj);
  const double span = e.max - e.min;
  if (!(span > 0.0)) return 0.0;
  double sum = 0.0;
  for (double x : cluster_proj) sum += (x - e.min) / span;
  const double mean = sum / static_cast<double>(cluster_proj.size());
  double ss = 0.0;
  for (double x : cluster_proj) {
    const double s = (x - e.min) / span - mean;
    ss += s * s;
  }
  return ss / static_cast<double>(cluster_proj.size());
}

AlphaCandidate evaluate_alpha(const Eigen::MatrixXd& points, const std::vector<bool>& in_cluster,
                              const ContrastCovariances& cov, double alpha) {
  AlphaCandidate c;
  c.alpha = alpha;
  c.first = top_eigs(contrast_matrix(cov.entire, cov.complement, alpha), 1).front();
  const Eigen::VectorXd proj = (points.rowwise() - cov.entire.mean.transpose()) * c.first.vector;
  std::vector<double> k_proj;
  std::vector<double> r_proj;
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    (in_cluster[static_cast<std::size_t>(i)] ? k_proj : r_proj).push_back(proj(i));
  }
  c.discrepancy = discrepancy(k_proj, r_proj);
  c.variance = scaled_variance(k_proj, r_proj);
  return c;
}

std::size_t choose_alpha(std::span<const AlphaCandidate> candidates, double gamma, bool* fallback) {
  if (candidates.empty()) throw InputError("choose_alpha: no candidates");
  if (!(gamma >= 0.0)) throw InputError("gamma must be non-negative");
  const double threshold = gamma * candidates.front().variance;
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.variance < threshold || c.first.value < 0.0) continue;
    if (best == candidates.size() || c.discrepancy > candidates[best].discrepancy) best = i;
  }
  if (fallback) *fallback = best == candidates.size();
  return best == candidates.size() ? 0 : best;
}

AlphaScan select_alpha(const EmbeddedDataset& dataset, int cluster_id, const AlphaGrid& grid, double gamma,
                       unsigned threads) {
  if (grid.values.empty()) throw InputError("select_alpha: empty alpha grid");
  if (!(gamma >= 0.0)) throw InputError("gamma must be non-negative");
  if (dataset.table.missing_count() > 0) throw InputError("select_alpha requires imputed data");
  const auto mask = cluster_mask(dataset, cluster_id);
  const auto& points = dataset.table.points;
  const auto cov = contrast_covariances(points, mask);

  AlphaScan scan;
  scan.gamma = gamma;
  scan.candidates.resize(grid.values.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.values.size(); i = next++) {
      try {
        scan.candidates[i] = evaluate_alpha(points, mask, cov, grid.values[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(grid.values.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  scan.chosen_index = choose_alpha(scan.candidates, gamma, &scan.fallback);
  return scan;
}

}  // namespace ccpca
