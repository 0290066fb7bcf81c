#include "ccpca/serialization.hpp"

#include <cmath>

namespace ccpca {

Json number_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  auto out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v(i)));
  return out;
}

Json index_json(const std::vector<Eigen::Index>& v) {
  auto out = Json::array();
  for (auto i : v) out.push_back(i);
  return out;
}

}  // namespace

Json to_json(const ContrastResult& result) {
  Json out;
  out["cluster"] = result.cluster_id;
  out["alpha"] = number_json(result.alpha);
  out["eigenvalues"] = Json::array();
  out["components"] = Json::array();
  for (const auto& c : result.components) {
    out["eigenvalues"].push_back(number_json(c.value));
    out["components"].push_back(vector_json(c.vector));
  }
  out["loadings"] = vector_json(result.loadings);
  return out;
}

Json to_json(const AlphaScan& scan) {
  Json out;
  out["gamma"] = number_json(scan.gamma);
  out["candidates"] = Json::array();
  for (const auto& c : scan.candidates) {
    out["candidates"].push_back({{"alpha", number_json(c.alpha)},
                                 {"D", number_json(c.discrepancy)},
                                 {"V", number_json(c.variance)},
                                 {"eigenvalue", number_json(c.first.value)}});
  }
  out["chosen_index"] = scan.chosen_index;
  out["chosen_alpha"] = number_json(scan.chosen().alpha);
  out["fallback"] = scan.fallback;
  return out;
}

Json to_json(const FCMatrix& fc) {
  Json out;
  out["features"] = fc.feature_names;
  out["clusters"] = fc.cluster_ids;
  out["cluster_names"] = Json::array();
  for (int c : fc.cluster_ids) out["cluster_names"].push_back(cluster_name(c));
  out["values"] = Json::array();
  for (Eigen::Index c = 0; c < fc.values.cols(); ++c) out["values"].push_back(vector_json(fc.values.col(c)));
  out["signs"] = fc.signs;
  return out;
}

Json to_json(const LayoutResult& layout) {
  Json out;
  out["row_order"] = index_json(layout.row_perm);
  out["col_order"] = index_json(layout.col_perm);
  out["aggregated"] = layout.aggregated;
  out["groups"] = Json::array();
  for (const auto& g : layout.groups) {
    out["groups"].push_back({{"members", index_json(g.members)},
                             {"label", g.display_label},
                             {"representative", g.representative_name},
                             {"values", vector_json(g.values)}});
  }
  return out;
}

Json labels_json(const std::vector<int>& labels) { return labels; }

}  // namespace ccpca
