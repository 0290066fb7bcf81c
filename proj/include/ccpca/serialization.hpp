#pragma once

#include "ccpca/alpha_select.hpp"
#include "ccpca/contributions.hpp"
#include "ccpca/matrix_layout.hpp"

#include <json.hpp>

namespace ccpca {

using Json = nlohmann::json;

/// Finite numbers as-is; +infinity as the string "inf" (and "-inf", "nan").
Json number_json(double value);

Json to_json(const ContrastResult& result);
/// {gamma, candidates:[{alpha, D, V}], chosen_alpha, fallback}
Json to_json(const AlphaScan& scan);
/// {features, clusters, cluster_names, values (column-major), signs}
Json to_json(const FCMatrix& fc);
/// {row_order, col_order, groups:[{members, label, representative, values}], aggregated}
Json to_json(const LayoutResult& layout);
/// Dataset bundle from an already parsed JSON document (same format as load_bundle).
EmbeddedDataset parse_bundle(const Json& doc);
/// Labels as integers; `names` renders -1 as "Z".
Json labels_json(const std::vector<int>& labels);

}  // namespace ccpca
