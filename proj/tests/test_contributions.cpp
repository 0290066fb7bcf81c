#include "ccpca/analysis.hpp"
#include "ccpca/contributions.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ccpca;

namespace {

std::vector<Eigen::VectorXd> random_dirs(std::mt19937_64& rng, std::size_t l, Eigen::Index d) {
  std::vector<Eigen::VectorXd> dirs;
  for (std::size_t i = 0; i < l; ++i) dirs.push_back(oracle::random_matrix(rng, d, 1).col(0).normalized());
  return dirs;
}

ContrastResult result_with(int id, const Eigen::VectorXd& w) {
  ContrastResult r;
  r.cluster_id = id;
  r.loadings = w;
  r.components.push_back({w.squaredNorm(), w.normalized()});
  return r;
}

}  // namespace

TEST_CASE("loadings") {
  CHECK(loadings({4.0, Eigen::Vector2d(0.6, 0.8)}).isApprox(Eigen::Vector2d(1.2, 1.6)));
  CHECK(loadings({0.0, Eigen::Vector2d(0.6, 0.8)}).isZero());
  const Eigen::Vector2d v(0.6, 0.8);
  CHECK(loadings({1.0, v}) == v);
  CHECK_THROWS_WITH_AS(loadings({-0.5, v}), doctest::Contains("no variance-positive contrastive direction"),
                       NumericalError);
}

TEST_CASE("scale_column") {
  CHECK(scale_column(Eigen::Vector2d(-0.1, 0.5)).isApprox(Eigen::Vector2d(-0.2, 1.0)));
  CHECK(scale_column(Eigen::Vector3d::Zero()).isZero());
  CHECK(scale_column(Eigen::Vector2d(-3, 1)).isApprox(Eigen::Vector2d(-1, 1.0 / 3.0)));
  std::mt19937_64 rng(1);
  const Eigen::VectorXd w = oracle::random_matrix(rng, 9, 1).col(0);
  const auto once = scale_column(w);
  CHECK(once.cwiseAbs().maxCoeff() == 1.0);
  CHECK(scale_column(once).isApprox(once));
  CHECK(scale_column(3.7 * w).isApprox(once));
}

TEST_CASE("sign objective") {
  const std::vector<Eigen::VectorXd> same{Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)};
  CHECK(sign_objective(same, std::vector<int>{1, 1}) == doctest::Approx(2.0));
  const std::vector<Eigen::VectorXd> opposite{Eigen::Vector2d(1, 2), Eigen::Vector2d(-1, -2)};
  CHECK(sign_objective(opposite, std::vector<int>{1, -1}) == doctest::Approx(2.0));
  std::mt19937_64 rng(2);
  const auto dirs = random_dirs(rng, 4, 6);
  const std::vector<int> phi{1, -1, -1, 1};
  CHECK(sign_objective(dirs, phi) == doctest::Approx(oracle::sign_objective(dirs, phi)).epsilon(1e-12));
  CHECK_THROWS_AS(sign_objective(dirs, std::vector<int>{1, 1}), InputError);
  CHECK_THROWS_AS(sign_objective(dirs, std::vector<int>{1, 0, 1, 1}), InputError);
  const std::vector<Eigen::VectorXd> empty{Eigen::VectorXd(), Eigen::VectorXd()};
  CHECK_THROWS_AS(sign_objective(empty, std::vector<int>{1, 1}), InputError);
  // Zero vectors contribute no similarity.
  const std::vector<Eigen::VectorXd> with_zero{Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero()};
  CHECK(sign_objective(with_zero, std::vector<int>{1, -1}) == 0.0);
}

TEST_CASE("optimize_signs small cases") {
  const std::vector<Eigen::VectorXd> one{Eigen::Vector2d(1, 0)};
  CHECK(optimize_signs(one).signs == std::vector<int>{1});
  const std::vector<Eigen::VectorXd> opposite{Eigen::Vector2d(1, 2), Eigen::Vector2d(-1, -2)};
  const auto r = optimize_signs(opposite);
  CHECK(r.signs[0] * r.signs[1] == -1);
  CHECK(r.objective_trace.back() == doctest::Approx(2.0));
  const std::vector<Eigen::VectorXd> with_zero{Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero(), Eigen::Vector2d(-1, 0)};
  const auto z = optimize_signs(with_zero);
  CHECK(z.signs[1] == 1);
  CHECK(z.signs[0] * z.signs[2] == -1);
}

TEST_CASE("optimize_signs against the exhaustive optimum") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  for (int rep = 0; rep < 60; ++rep) {
    const auto dirs = random_dirs(rng, size(rng), 5);
    const auto r = optimize_signs(dirs);
    const double initial = oracle::sign_objective(dirs, std::vector<int>(dirs.size(), 1));
    const double final_value = oracle::sign_objective(dirs, r.signs);
    CHECK(r.objective_trace.front() == doctest::Approx(initial));
    CHECK(final_value >= initial - 1e-12);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) CHECK(r.objective_trace[i] > r.objective_trace[i - 1]);
    CHECK(r.flipped.size() + 1 == r.objective_trace.size());
    CHECK(final_value <= oracle::best_sign_objective(dirs) + 1e-12);
    std::set<int> distinct(r.flipped.begin(), r.flipped.end());
    CHECK(distinct.size() == r.flipped.size());
  }
}

TEST_CASE("build_fc_matrix") {
  const Eigen::Vector3d w(0.2, -0.4, 0.1);
  const std::vector<ContrastResult> single{result_with(0, w)};
  const auto fc = build_fc_matrix(single, {"a", "b", "c"});
  // Oriented so the largest-magnitude entry is positive.
  CHECK(fc.values.col(0).isApprox(scale_column(-w)));
  CHECK(fc.signs == std::vector<int>{-1});

  // Mirrored clusters end up positively correlated.
  const std::vector<ContrastResult> mirrored{result_with(0, Eigen::Vector3d(1, 2, 0.5)),
                                             result_with(1, Eigen::Vector3d(-1.1, -1.9, -0.4))};
  const auto m = build_fc_matrix(mirrored, {"a", "b", "c"});
  CHECK(m.values.col(0).dot(m.values.col(1)) > 0.0);
  CHECK(m.cluster_ids == std::vector<int>{0, 1});

  const std::vector<ContrastResult> mismatch{result_with(0, Eigen::Vector3d(1, 2, 3)),
                                             result_with(1, Eigen::Vector2d(1, 2))};
  CHECK_THROWS_AS(build_fc_matrix(mismatch, {"a", "b", "c"}), InputError);
  CHECK_THROWS_AS(build_fc_matrix(single, {"a", "b"}), InputError);
}

TEST_CASE("flipping an input direction leaves the matrix unchanged") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<ContrastResult> results;
    for (int c = 0; c < 5; ++c) results.push_back(result_with(c, oracle::random_matrix(rng, 7, 1).col(0)));
    const std::vector<std::string> names{"a", "b", "c", "d", "e", "f", "g"};
    const auto base = build_fc_matrix(results, names);
    auto flipped = results;
    const auto which = static_cast<std::size_t>(rep % 5);
    flipped[which].loadings = -flipped[which].loadings;
    flipped[which].components[0].vector = -flipped[which].components[0].vector;
    const auto other = build_fc_matrix(flipped, names);
    CHECK(base.values == other.values);
    CHECK(other.signs[which] == -base.signs[which]);
  }
}

TEST_CASE("top features") {
  FCMatrix fc;
  fc.values.resize(4, 1);
  fc.values << 0.5, -1.0, 0.5, 0.2;
  fc.feature_names = {"a", "b", "c", "d"};
  const auto top = top_features(fc, 0, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].name == "b");
  CHECK(top[1].name == "a");
  CHECK(top[2].name == "c");
  CHECK(top_features(fc, 0, 4).size() == 4);
  CHECK(top_features(fc, 0, 10).size() == 4);
  CHECK_THROWS_AS(top_features(fc, 1, 3), InputError);
  CHECK(cluster_name(-1) == "Z");
  CHECK(cluster_name(3) == "3");
}

TEST_CASE("a single informative feature ranks first") {
  std::mt19937_64 rng(5);
  const auto ds = fixtures::separable_in_one_feature(rng, 80, 220, 6, 4.0, 0.5);
  AnalysisOptions options;
  const auto result = analyze_labeled(ds, options);
  for (const auto& c : result.clusters) {
    REQUIRE_FALSE(c.top.empty());
    CHECK(c.top.front().feature == 0);
  }
}
