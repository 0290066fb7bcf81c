#include "ccpca/dataset.hpp"
#include "ccpca/errors.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace ccpca;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("ccpca_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

DataTable table_with_missing() {
  // 5 points x 3 features; feature c is 60% missing, row 4 is 2/3 missing.
  return parse_delimited(
      "a,b,c\n"
      "1,2,\n"
      "2,NA,\n"
      "3,4,5\n"
      "4,5,nan\n"
      "5,,\n");
}

}  // namespace

TEST_CASE("parse_delimited builds a minimal table") {
  const auto t = parse_delimited("x\n5");
  CHECK(t.rows() == 1);
  CHECK(t.cols() == 1);
  CHECK(t.points(0, 0) == 5.0);
  CHECK(t.missing_count() == 0);
  CHECK(t.point_ids == std::vector<std::string>{"0"});
}

TEST_CASE("one blank cell gives exactly one missing entry") {
  const auto t = parse_delimited("a,b\n1,2\n3,\n");
  CHECK(t.missing_count() == 1);
  CHECK(t.missing_mask(1, 1));
  CHECK(std::isnan(t.points(1, 1)));
}

TEST_CASE("missing tokens and malformed cells") {
  CHECK(is_missing_token(""));
  CHECK(is_missing_token("NA"));
  CHECK(is_missing_token("na"));
  CHECK(is_missing_token("NaN"));
  CHECK(is_missing_token(" nan "));
  CHECK_FALSE(is_missing_token("0"));
  LoadReport report;
  const auto t = parse_delimited("a,b\n1,abc\nNA,2\n", ',', &report);
  CHECK(report.missing_cells == 2);
  CHECK(report.malformed_cells == 1);
  CHECK(t.missing_mask(0, 1));
  CHECK(t.missing_mask(1, 0));
}

TEST_CASE("an id column supplies point ids and quoted fields keep commas") {
  const auto t = parse_delimited("ID,\"x, y\",z\np1,1,2\np2,3,4\n");
  CHECK(t.feature_names == std::vector<std::string>{"x, y", "z"});
  CHECK(t.point_ids == std::vector<std::string>{"p1", "p2"});
  CHECK(t.points(1, 0) == 3.0);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_delimited(""), InputError);
  CHECK_THROWS_AS(parse_delimited("a,b\n1,2,3\n"), InputError);
  CHECK_THROWS_AS(parse_delimited("id\n1\n"), InputError);
  CHECK_THROWS_AS(parse_delimited("a,a\n1,2\n"), InputError);
  CHECK_THROWS_AS(load_table("/nonexistent/file.csv", TableFormat::csv), InputError);
}

TEST_CASE("load_table reads the Wine features from the bundled fixture") {
  const auto t = load_table(fixtures::data_dir() / "wine.json", TableFormat::json);
  CHECK(t.rows() == 178);
  CHECK(t.cols() == 13);
}

TEST_CASE("tab separated files") {
  const auto path = temp_file("tab.tsv", "a\tb\n1\t2\n");
  const auto t = load_table(path, TableFormat::csv);
  CHECK(t.cols() == 2);
  CHECK(t.points(0, 1) == 2.0);
}

TEST_CASE("filter_missing drops features first, then points, with strict thresholds") {
  const auto t = table_with_missing();
  const auto f = filter_missing(t, 0.4, 0.4);
  REQUIRE(f.feature_names == std::vector<std::string>{"a", "b"});
  // Row 1 and row 4 each miss 1 of 2 remaining features (0.5 > 0.4).
  CHECK(f.point_ids == std::vector<std::string>{"0", "2", "3"});
  // Exactly at the threshold is kept.
  const auto g = filter_missing(t, 0.8, 1.0);
  CHECK(g.cols() == 3);
  CHECK(g.rows() == 5);
}

TEST_CASE("filter_missing is a no-op without missing values and idempotent otherwise") {
  const auto clean = parse_delimited("a,b\n1,2\n3,4\n");
  const auto same = filter_missing(clean, 0.0, 0.0);
  CHECK(same.points == clean.points);
  CHECK(same.feature_names == clean.feature_names);

  const auto t = table_with_missing();
  const auto once = filter_missing(t, 0.4, 0.4);
  const auto twice = filter_missing(once, 0.4, 0.4);
  CHECK(twice.feature_names == once.feature_names);
  CHECK(twice.point_ids == once.point_ids);
  CHECK(twice.missing_mask == once.missing_mask);
}

TEST_CASE("filter_missing reports which pass emptied the table") {
  const auto t = parse_delimited("a,b\n,\n,1\n");
  CHECK_THROWS_WITH_AS(filter_missing(t, 0.0, 1.0), doctest::Contains("feature"), InputError);
  const auto u = parse_delimited("a,b\n,1\n1,\n");
  CHECK_THROWS_WITH_AS(filter_missing(u, 1.0, 0.0), doctest::Contains("point"), InputError);
  CHECK_THROWS_AS(filter_missing(u, 1.5, 0.0), InputError);
}

TEST_CASE("filter_missing keeps coords and labels aligned") {
  auto ds = fixtures::make_dataset(Eigen::MatrixXd::Zero(3, 2), {0, 1, 1});
  ds.table.points(1, 0) = std::nan("");
  ds.table.points(1, 1) = std::nan("");
  ds.table.missing_mask(1, 0) = ds.table.missing_mask(1, 1) = true;
  ds.coords2d.resize(3, 2);
  ds.coords2d << 0, 0, 1, 1, 2, 2;
  const auto f = filter_missing(ds, 1.0, 0.5);
  CHECK(f.table.rows() == 2);
  CHECK(f.coords2d(1, 0) == 2.0);
  // Cluster 0 survives; the remaining point of cluster 1 keeps its relabeled id.
  CHECK(f.labels == std::vector<int>{0, 1});
}

TEST_CASE("impute_mean fills with the observed mean") {
  const auto t = parse_delimited("a\n1\nNA\n3\n");
  const auto imp = impute_mean(t);
  CHECK(imp.points(1, 0) == 2.0);
  CHECK(imp.missing_count() == 0);
  const auto clean = parse_delimited("a,b\n1,2\n3,4\n");
  CHECK(impute_mean(clean).points == clean.points);
  CHECK_THROWS_AS(impute_mean(parse_delimited("a,b\n,1\n,2\n")), InputError);
}

TEST_CASE("impute_mean preserves each feature's observed mean") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution drop(0.3);
  DataTable t;
  t.points.resize(40, 5);
  t.missing_mask.resize(40, 5);
  for (Eigen::Index j = 0; j < 5; ++j) t.feature_names.push_back("f" + std::to_string(j));
  for (Eigen::Index i = 0; i < 40; ++i) {
    t.point_ids.push_back(std::to_string(i));
    for (Eigen::Index j = 0; j < 5; ++j) {
      const bool missing = i > 0 && drop(rng);
      t.missing_mask(i, j) = missing;
      t.points(i, j) = missing ? std::nan("") : normal(rng);
    }
  }
  const auto imp = impute_mean(t);
  for (Eigen::Index j = 0; j < 5; ++j) {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < 40; ++i) {
      if (!t.missing_mask(i, j)) {
        sum += t.points(i, j);
        ++n;
      }
    }
    CHECK(imp.points.col(j).mean() == doctest::Approx(sum / n).epsilon(1e-12));
  }
}

TEST_CASE("standardize gives zero mean and unit population spread") {
  const auto t = parse_delimited("a,b\n1,5\n2,5\n3,5\n");
  const auto z = standardize(t);
  CHECK(z.points.col(0).mean() == doctest::Approx(0.0));
  CHECK(z.points.col(0).squaredNorm() / 3.0 == doctest::Approx(1.0));
  CHECK(z.points.col(1).isZero());
}

TEST_CASE("bundle save and load round-trips finite values exactly") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1e3);
  Eigen::MatrixXd x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  auto ds = fixtures::make_dataset(x, {0, 0, -1, 1, 1, 0});
  ds.table.points(2, 1) = std::nan("");
  ds.table.missing_mask(2, 1) = true;
  ds.coords2d = Eigen::MatrixX2d::Random(6, 2) * 1e-7;
  const auto path = std::filesystem::temp_directory_path() / "ccpca_test_roundtrip.json";
  save_bundle(ds, path);
  const auto back = load_bundle(path);
  CHECK(back.table.feature_names == ds.table.feature_names);
  CHECK(back.table.point_ids == ds.table.point_ids);
  CHECK(back.table.missing_mask == ds.table.missing_mask);
  CHECK(back.labels == ds.labels);
  CHECK(back.coords2d == ds.coords2d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!ds.table.missing_mask(i, j)) CHECK(back.table.points(i, j) == ds.table.points(i, j));
    }
  }
}

TEST_CASE("bundle validation") {
  CHECK_THROWS_AS(load_bundle(temp_file("bad1.json", "{\"features\":[\"a\"]}")), InputError);
  CHECK_THROWS_AS(load_bundle(temp_file("bad2.json", "{\"features\":[\"a\"],\"points\":[[1],[2,3]]}")), InputError);
  CHECK_THROWS_AS(load_bundle(temp_file("bad3.json", "{\"features\":[\"a\"],\"points\":[[1]],\"labels\":[0,1]}")),
                  InputError);
  // Labels must be compact.
  CHECK_THROWS_AS(load_bundle(temp_file("bad4.json", "{\"features\":[\"a\"],\"points\":[[1],[2]],\"labels\":[0,2]}")),
                  InputError);
  CHECK_THROWS_AS(load_bundle(temp_file("bad5.json", "not json")), InputError);
}

TEST_CASE("embedded dataset cluster helpers") {
  auto ds = fixtures::make_dataset(Eigen::MatrixXd::Zero(4, 1), {1, 0, -1, 1});
  CHECK(ds.cluster_count() == 2);
  CHECK(ds.has_noise());
  CHECK(ds.analysis_clusters() == std::vector<int>{0, 1, -1});
}
