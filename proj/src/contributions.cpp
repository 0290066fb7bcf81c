#include "ccpca/contributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ccpca {

Eigen::VectorXd loadings(const EigenPair<double>& pair) {
  if (pair.value < 0.0) {
    throw NumericalError("no variance-positive contrastive direction (top eigenvalue " +
                         std::to_string(pair.value) + " < 0)");
  }
  return std::sqrt(pair.value) * pair.vector;
}

Eigen::VectorXd scale_column(const Eigen::VectorXd& w) {
  if (w.size() == 0) return w;
  const double m = w.cwiseAbs().maxCoeff();
  if (m == 0.0) return w;
  return w / m;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

namespace {

Eigen::MatrixXd similarity_matrix(std::span<const Eigen::VectorXd> dirs) {
  const auto l = static_cast<Eigen::Index>(dirs.size());
  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) {
      if (dirs[static_cast<std::size_t>(i)].size() != dirs[static_cast<std::size_t>(j)].size()) {
        throw InputError("direction vectors differ in length");
      }
      sim(i, j) = sim(j, i) = cosine_similarity(dirs[static_cast<std::size_t>(i)], dirs[static_cast<std::size_t>(j)]);
    }
  }
  return sim;
}

double objective(const Eigen::MatrixXd& sim, const std::vector<int>& phi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    for (Eigen::Index j = 0; j < sim.cols(); ++j) {
      if (i != j) total += phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)] * sim(i, j);
    }
  }
  return total;
}

}  // namespace

double sign_objective(std::span<const Eigen::VectorXd> dirs, std::span<const int> phi) {
  if (dirs.size() != phi.size()) throw InputError("sign_objective: one sign per direction required");
  for (const auto& d : dirs) {
    if (d.size() == 0) throw InputError("sign_objective: zero-length vector");
  }
  for (int s : phi) {
    if (s != 1 && s != -1) throw InputError("sign_objective: signs must be +1 or -1");
  }
  return objective(similarity_matrix(dirs), std::vector<int>(phi.begin(), phi.end()));
}

SignOptimization optimize_signs(std::span<const Eigen::VectorXd> dirs) {
  const auto sim = similarity_matrix(dirs);
  const auto l = dirs.size();
  SignOptimization out;
  out.signs.assign(l, 1);
  double current = objective(sim, out.signs);
  out.objective_trace.push_back(current);

  std::vector<bool> checked(l, false);
  for (std::size_t round = 0; round < l; ++round) {
    // Row sums exclude the self term, matching the objective.
    int worst = -1;
    double worst_sum = 0.0;
    bool all_non_negative = true;
    for (std::size_t i = 0; i < l; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        if (i != j) {
          row += out.signs[i] * out.signs[j] * sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
      if (row < 0.0) all_non_negative = false;
      if (!checked[i] && (worst < 0 || row < worst_sum)) {
        worst = static_cast<int>(i);
        worst_sum = row;
      }
    }
    if (all_non_negative || worst < 0) break;
    checked[static_cast<std::size_t>(worst)] = true;

    auto trial = out.signs;
    trial[static_cast<std::size_t>(worst)] = -trial[static_cast<std::size_t>(worst)];
    const double candidate = objective(sim, trial);
    if (candidate > current) {
      out.signs = std::move(trial);
      current = candidate;
      out.objective_trace.push_back(current);
      out.flipped.push_back(worst);
    }
  }
  return out;
}

FCMatrix build_fc_matrix(std::span<const ContrastResult> results, std::vector<std::string> feature_names) {
  if (results.empty()) throw InputError("build_fc_matrix: no contrast results");
  const auto d = results.front().loadings.size();
  for (const auto& r : results) {
    if (r.loadings.size() != d) throw InputError("build_fc_matrix: inconsistent feature count across clusters");
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != d) {
    throw InputError("build_fc_matrix: feature name count differs from loading length");
  }
  // Canonical orientation before the sign search.
  std::vector<Eigen::VectorXd> dirs;
  std::vector<int> canonical;
  for (const auto& r : results) {
    Eigen::VectorXd v = r.loadings;
    detail::orient(v);
    canonical.push_back(v == r.loadings ? 1 : -1);
    dirs.push_back(std::move(v));
  }
  auto signs = optimize_signs(dirs).signs;
  for (std::size_t c = 0; c < signs.size(); ++c) signs[c] *= canonical[c];

  FCMatrix fc;
  fc.feature_names = std::move(feature_names);
  fc.values.resize(d, static_cast<Eigen::Index>(results.size()));
  for (std::size_t c = 0; c < results.size(); ++c) {
    fc.values.col(static_cast<Eigen::Index>(c)) = scale_column(static_cast<double>(signs[c]) * results[c].loadings);
    fc.cluster_ids.push_back(results[c].cluster_id);
  }
  fc.signs = signs;
  return fc;
}

std::string cluster_name(int cluster_id) {
  return cluster_id == kNoiseLabel ? "Z" : std::to_string(cluster_id);
}

std::vector<FeatureContribution> top_features(const FCMatrix& fc, Eigen::Index column, Eigen::Index k) {
  if (column < 0 || column >= fc.values.cols()) throw InputError("top_features: column out of range");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(fc.values.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(fc.values(a, column)) > std::abs(fc.values(b, column));
  });
  order.resize(static_cast<std::size_t>(std::clamp<Eigen::Index>(k, 0, fc.values.rows())));
  std::vector<FeatureContribution> out;
  for (auto f : order) out.push_back({f, fc.feature_names[static_cast<std::size_t>(f)], fc.values(f, column)});
  return out;
}

}  // namespace ccpca
