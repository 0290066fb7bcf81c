#include "ccpca/matrix_layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace ccpca {

std::vector<Eigen::Index> Dendrogram::leaves(Eigen::Index node) const {
  std::vector<Eigen::Index> out;
  std::vector<Eigen::Index> stack{node};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (v < leaf_count) {
      out.push_back(v);
    } else {
      const auto& m = merges[static_cast<std::size_t>(v - leaf_count)];
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  return out;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& vectors) {
  const auto n = vectors.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (vectors.row(i) - vectors.row(j)).norm();
    }
  }
  return dist;
}

Dendrogram linkage_complete(const Eigen::MatrixXd& vectors) {
  const auto n = vectors.rows();
  if (n < 1) throw InputError("linkage_complete: no vectors");
  Dendrogram dend;
  dend.leaf_count = n;
  Eigen::MatrixXd dist = pairwise_distances(vectors);
  // Slot s holds the cluster whose smallest leaf is s.
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<Eigen::Index> node(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> size(static_cast<std::size_t>(n), 1);
  std::iota(node.begin(), node.end(), Eigen::Index{0});

  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    Eigen::Index bi = -1;
    Eigen::Index bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (bi < 0 || dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const auto ui = static_cast<std::size_t>(bi);
    const auto uj = static_cast<std::size_t>(bj);
    dend.merges.push_back({node[ui], node[uj], best, size[ui] + size[uj]});
    for (Eigen::Index k = 0; k < n; ++k) {
      dist(bi, k) = dist(k, bi) = std::max(dist(bi, k), dist(bj, k));
    }
    dist(bi, bi) = 0.0;
    active[uj] = false;
    node[ui] = n + step;
    size[ui] += size[uj];
  }
  return dend;
}

double adjacent_cost(const std::vector<Eigen::Index>& order, const Eigen::MatrixXd& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) total += dist(order[i], order[i + 1]);
  return total;
}

namespace {

class LeafOrderer {
 public:
  LeafOrderer(const Dendrogram& dend, const Eigen::MatrixXd& dist)
      : dend_(dend), dist_(dist), n_(dend.leaf_count) {
    cost_ = Eigen::MatrixXd::Zero(n_, n_);
    lca_ = Eigen::MatrixXi::Constant(n_, n_, -1);
    const auto internal = dend.merges.size();
    left_.resize(internal);
    right_.resize(internal);
    side_.resize(internal);
    for (std::size_t k = 0; k < internal; ++k) fill(static_cast<Eigen::Index>(k));
  }

  std::vector<Eigen::Index> solve() {
    if (n_ == 1) return {0};
    const auto root = static_cast<std::size_t>(dend_.root() - n_);
    double best = std::numeric_limits<double>::infinity();
    for (auto i : left_[root]) {
      for (auto j : right_[root]) best = std::min(best, cost_(i, j));
    }
    std::vector<Eigen::Index> result;
    for (const auto* outer : {&left_[root], &right_[root]}) {
      const auto* inner = outer == &left_[root] ? &right_[root] : &left_[root];
      for (auto i : *outer) {
        for (auto j : *inner) {
          if (!close(cost_(i, j), best)) continue;
          std::vector<Eigen::Index> candidate;
          materialize(i, j, candidate);
          if (result.empty() || candidate < result) result = std::move(candidate);
        }
      }
    }
    return result;
  }

 private:
  static bool close(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  }

  std::vector<Eigen::Index> leaf_set(Eigen::Index node) const { return dend_.leaves(node); }

  bool is_leaf(Eigen::Index node) const { return node < n_; }

  // Leaves of `node` on the opposite side from `leaf`; {leaf} for a leaf node.
  const std::vector<Eigen::Index>& partners(Eigen::Index node, Eigen::Index leaf, std::vector<Eigen::Index>& scratch) const {
    if (is_leaf(node)) {
      scratch.assign(1, leaf);
      return scratch;
    }
    const auto k = static_cast<std::size_t>(node - n_);
    return side_[k][static_cast<std::size_t>(leaf)] == 0 ? right_[k] : left_[k];
  }

  double inner_cost(Eigen::Index node, Eigen::Index from, Eigen::Index to) const {
    return is_leaf(node) ? 0.0 : cost_(from, to);
  }

  void fill(Eigen::Index k) {
    const auto& merge = dend_.merges[static_cast<std::size_t>(k)];
    const auto uk = static_cast<std::size_t>(k);
    left_[uk] = leaf_set(merge.left);
    right_[uk] = leaf_set(merge.right);
    side_[uk].assign(static_cast<std::size_t>(n_), -1);
    for (auto i : left_[uk]) side_[uk][static_cast<std::size_t>(i)] = 0;
    for (auto j : right_[uk]) side_[uk][static_cast<std::size_t>(j)] = 1;

    std::vector<Eigen::Index> scratch_a;
    std::vector<Eigen::Index> scratch_b;
    std::vector<double> through(static_cast<std::size_t>(n_));
    for (auto i : left_[uk]) {
      const auto& ks = partners(merge.left, i, scratch_a);
      // through[m] = min_k cost(i..k within left) + d(k, m)
      for (auto m : right_[uk]) {
        double best = std::numeric_limits<double>::infinity();
        for (auto kk : ks) best = std::min(best, inner_cost(merge.left, i, kk) + dist_(kk, m));
        through[static_cast<std::size_t>(m)] = best;
      }
      for (auto j : right_[uk]) {
        const auto& ms = partners(merge.right, j, scratch_b);
        double best = std::numeric_limits<double>::infinity();
        for (auto m : ms) best = std::min(best, through[static_cast<std::size_t>(m)] + inner_cost(merge.right, m, j));
        cost_(i, j) = cost_(j, i) = best;
        lca_(i, j) = lca_(j, i) = static_cast<int>(k);
      }
    }
  }

  // Appends the lexicographically smallest optimal order of lca(i, j)'s leaves from i to j.
  void materialize(Eigen::Index i, Eigen::Index j, std::vector<Eigen::Index>& out) {
    if (i == j) {
      out.push_back(i);
      return;
    }
    const auto [k, m] = choose(i, j);
    materialize(i, k, out);
    materialize(m, j, out);
  }

  std::pair<Eigen::Index, Eigen::Index> choose(Eigen::Index i, Eigen::Index j) {
    const auto key = i * n_ + j;
    if (auto it = choice_.find(key); it != choice_.end()) return it->second;

    const auto node = static_cast<std::size_t>(lca_(i, j));
    const auto& merge = dend_.merges[node];
    const bool i_left = side_[node][static_cast<std::size_t>(i)] == 0;
    const auto first = i_left ? merge.left : merge.right;
    const auto second = i_left ? merge.right : merge.left;
    const double target = cost_(i, j);

    std::vector<Eigen::Index> scratch_a;
    std::vector<Eigen::Index> scratch_b;
    const auto ks = partners(first, i, scratch_a);
    const auto& ms = partners(second, j, scratch_b);
    // For each feasible k, the smallest feasible m (the second part then starts lowest).
    std::vector<std::pair<Eigen::Index, Eigen::Index>> options;
    for (auto k : ks) {
      Eigen::Index best_m = -1;
      for (auto m : ms) {
        const double c = inner_cost(first, i, k) + dist_(k, m) + inner_cost(second, m, j);
        if (close(c, target) && (best_m < 0 || m < best_m)) best_m = m;
      }
      if (best_m >= 0) options.emplace_back(k, best_m);
    }
    auto chosen = options.front();
    if (options.size() > 1) {
      std::vector<Eigen::Index> best_prefix;
      for (const auto& opt : options) {
        std::vector<Eigen::Index> prefix;
        materialize(i, opt.first, prefix);
        if (best_prefix.empty() || prefix < best_prefix) {
          best_prefix = std::move(prefix);
          chosen = opt;
        }
      }
    }
    choice_.emplace(key, chosen);
    return chosen;
  }

  const Dendrogram& dend_;
  const Eigen::MatrixXd& dist_;
  Eigen::Index n_;
  Eigen::MatrixXd cost_;
  Eigen::MatrixXi lca_;
  std::vector<std::vector<Eigen::Index>> left_;
  std::vector<std::vector<Eigen::Index>> right_;
  std::vector<std::vector<signed char>> side_;
  std::unordered_map<Eigen::Index, std::pair<Eigen::Index, Eigen::Index>> choice_;
};

}  // namespace

std::vector<Eigen::Index> optimal_leaf_order(const Dendrogram& dendrogram, const Eigen::MatrixXd& dist) {
  if (dendrogram.leaf_count < 1) throw InputError("optimal_leaf_order: empty dendrogram");
  if (dist.rows() != dendrogram.leaf_count || dist.cols() != dendrogram.leaf_count) {
    throw InputError("optimal_leaf_order: distance matrix does not match the leaves");
  }
  return LeafOrderer(dendrogram, dist).solve();
}

std::vector<int> cut_tree(const Dendrogram& dendrogram, Eigen::Index groups,
                          const std::vector<Eigen::Index>& leaf_order) {
  const auto n = dendrogram.leaf_count;
  if (groups < 1) throw InputError("cut_tree: need at least one group");
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  // Representative leaf of every node, so merges can be replayed on leaves.
  std::vector<Eigen::Index> rep(static_cast<std::size_t>(n) + dendrogram.merges.size());
  std::iota(rep.begin(), rep.begin() + n, Eigen::Index{0});
  const auto applied = std::max<Eigen::Index>(0, n - groups);
  for (std::size_t k = 0; k < dendrogram.merges.size(); ++k) {
    const auto& m = dendrogram.merges[k];
    rep[static_cast<std::size_t>(n) + k] = rep[static_cast<std::size_t>(m.left)];
    if (static_cast<Eigen::Index>(k) < applied) {
      parent[static_cast<std::size_t>(find(rep[static_cast<std::size_t>(m.right)]))] = find(rep[static_cast<std::size_t>(m.left)]);
    }
  }
  std::vector<int> ids(static_cast<std::size_t>(n), -1);
  std::unordered_map<Eigen::Index, int> numbering;
  for (auto leaf : leaf_order) {
    const auto root = find(leaf);
    auto [it, inserted] = numbering.emplace(root, static_cast<int>(numbering.size()));
    ids[static_cast<std::size_t>(leaf)] = it->second;
  }
  return ids;
}

AggregationMode parse_aggregation_mode(const std::string& text) {
  if (text == "max_abs") return AggregationMode::max_abs;
  if (text == "mean") return AggregationMode::mean;
  throw InputError("unknown aggregation mode '" + text + "' (expected max_abs or mean)");
}

std::string to_string(AggregationMode mode) {
  return mode == AggregationMode::max_abs ? "max_abs" : "mean";
}

double aggregate(std::span<const double> cells, AggregationMode mode) {
  if (cells.empty()) return 0.0;
  if (mode == AggregationMode::mean) {
    return std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
  }
  double best = cells.front();
  for (double c : cells.subspan(1)) {
    if (std::abs(c) > std::abs(best) || (std::abs(c) == std::abs(best) && c > best)) best = c;
  }
  return best;
}

LayoutResult layout(const FCMatrix& fc, int delta, AggregationMode mode) {
  if (delta < 1) throw InputError("layout: delta must be at least 1");
  const auto d = fc.values.rows();
  const auto l = fc.values.cols();
  if (d < 1 || l < 1) throw InputError("layout: empty feature contribution matrix");

  LayoutResult out;
  out.row_dendrogram = linkage_complete(fc.values);
  out.row_perm = optimal_leaf_order(out.row_dendrogram, pairwise_distances(fc.values));
  const Eigen::MatrixXd columns = fc.values.transpose();
  out.col_dendrogram = linkage_complete(columns);
  out.col_perm = optimal_leaf_order(out.col_dendrogram, pairwise_distances(columns));

  std::vector<std::vector<Eigen::Index>> members;
  if (d > delta) {
    out.aggregated = true;
    const auto ids = cut_tree(out.row_dendrogram, delta, out.row_perm);
    members.resize(static_cast<std::size_t>(*std::max_element(ids.begin(), ids.end()) + 1));
    for (auto r : out.row_perm) members[static_cast<std::size_t>(ids[static_cast<std::size_t>(r)])].push_back(r);
  } else {
    for (auto r : out.row_perm) members.push_back({r});
  }

  for (auto& group : members) {
    FeatureGroup g;
    g.members = std::move(group);
    g.values.resize(l);
    std::vector<double> cells;
    for (Eigen::Index c = 0; c < l; ++c) {
      cells.clear();
      for (auto r : g.members) cells.push_back(fc.values(r, c));
      g.values(c) = aggregate(cells, mode);
    }
    double strongest = -1.0;
    for (auto r : g.members) {
      const double m = fc.values.row(r).cwiseAbs().maxCoeff();
      if (m > strongest) {
        strongest = m;
        g.representative = r;
      }
    }
    g.representative_name = fc.feature_names[static_cast<std::size_t>(g.representative)];
    g.display_label = g.representative_name;
    if (g.members.size() > 1) g.display_label += ", " + std::to_string(g.members.size() - 1) + " more";
    out.groups.push_back(std::move(g));
  }
  return out;
}

}  // namespace ccpca
