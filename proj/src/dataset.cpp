#include "ccpca/dataset.hpp"

#include "ccpca/errors.hpp"
#include "ccpca/serialization.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ccpca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Splits one record; double quotes group a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

DataTable select(const DataTable& table, const std::vector<Eigen::Index>& rows,
                 const std::vector<Eigen::Index>& cols) {
  DataTable out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.missing_mask.resize(out.points.rows(), out.points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.points(rows[i], cols[j]);
      out.missing_mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          table.missing_mask(rows[i], cols[j]);
    }
  }
  for (auto j : cols) out.feature_names.push_back(table.feature_names[static_cast<std::size_t>(j)]);
  for (auto i : rows) out.point_ids.push_back(table.point_ids[static_cast<std::size_t>(i)]);
  return out;
}

struct FilterIndices {
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
};

FilterIndices filter_indices(const DataTable& table, double feature_thresh, double point_thresh) {
  if (!(feature_thresh >= 0.0 && feature_thresh <= 1.0) ||
      !(point_thresh >= 0.0 && point_thresh <= 1.0)) {
    throw InputError("missing-value thresholds must lie in [0, 1]");
  }
  table.validate();
  const auto n = table.rows();
  const auto d = table.cols();

  FilterIndices keep;
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto missing = table.missing_mask.col(j).count();
    if (static_cast<double>(missing) / static_cast<double>(n) <= feature_thresh) keep.cols.push_back(j);
  }
  if (keep.cols.empty()) throw InputError("filter_missing: feature pass removed every feature");

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index missing = 0;
    for (auto j : keep.cols) missing += table.missing_mask(i, j) ? 1 : 0;
    if (static_cast<double>(missing) / static_cast<double>(keep.cols.size()) <= point_thresh) {
      keep.rows.push_back(i);
    }
  }
  if (keep.rows.empty()) throw InputError("filter_missing: point pass removed every point");
  return keep;
}

}  // namespace

std::size_t DataTable::missing_count() const {
  return static_cast<std::size_t>(missing_mask.count());
}

void DataTable::validate() const {
  if (points.rows() < 1 || points.cols() < 1) throw InputError("table needs at least one point and one feature");
  if (missing_mask.rows() != points.rows() || missing_mask.cols() != points.cols()) {
    throw InputError("missing mask shape differs from value shape");
  }
  if (feature_names.size() != static_cast<std::size_t>(points.cols())) {
    throw InputError("feature name count differs from column count");
  }
  if (point_ids.size() != static_cast<std::size_t>(points.rows())) {
    throw InputError("point id count differs from row count");
  }
  std::set<std::string_view> seen;
  for (const auto& name : feature_names) {
    if (!seen.insert(name).second) throw InputError("duplicate feature name: " + name);
  }
}

int EmbeddedDataset::cluster_count() const {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

bool EmbeddedDataset::has_noise() const {
  return std::find(labels.begin(), labels.end(), kNoiseLabel) != labels.end();
}

std::vector<int> EmbeddedDataset::analysis_clusters() const {
  std::vector<int> ids;
  for (int c = 0; c < cluster_count(); ++c) ids.push_back(c);
  if (has_noise()) ids.push_back(kNoiseLabel);
  return ids;
}

void EmbeddedDataset::validate() const {
  table.validate();
  const auto n = static_cast<std::size_t>(table.rows());
  if (has_coords() && static_cast<std::size_t>(coords2d.rows()) != n) {
    throw InputError("coords2d length differs from point count");
  }
  if (has_labels()) {
    if (labels.size() != n) throw InputError("label count differs from point count");
    std::vector<bool> used(static_cast<std::size_t>(std::max(cluster_count(), 0)), false);
    for (int l : labels) {
      if (l < kNoiseLabel) throw InputError("labels must be -1 (noise) or non-negative");
      if (l >= 0) used[static_cast<std::size_t>(l)] = true;
    }
    if (std::find(used.begin(), used.end(), false) != used.end()) {
      throw InputError("cluster labels must be compact 0..l-1");
    }
  }
}

bool is_missing_token(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || iequals(cell, "NA") || iequals(cell, "NaN");
}

DataTable parse_delimited(std::string_view text, char delimiter, LoadReport* report) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw InputError("delimited input has no header row");

  auto header = split_record(lines.front(), delimiter);
  const bool has_ids = iequals(trim(header.front()), "id");
  const std::size_t first_feature = has_ids ? 1 : 0;
  if (header.size() <= first_feature) throw InputError("delimited input has zero features");

  DataTable table;
  for (std::size_t j = first_feature; j < header.size(); ++j) {
    table.feature_names.emplace_back(trim(header[j]));
  }
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto d = static_cast<Eigen::Index>(table.feature_names.size());
  table.points.resize(n, d);
  table.missing_mask.resize(n, d);

  LoadReport local;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto fields = split_record(lines[static_cast<std::size_t>(i) + 1], delimiter);
    if (fields.size() != header.size()) {
      throw InputError("ragged row " + std::to_string(i + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    table.point_ids.push_back(has_ids ? std::string(trim(fields.front())) : std::to_string(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& cell = fields[first_feature + static_cast<std::size_t>(j)];
      double value = 0.0;
      if (is_missing_token(cell)) {
        table.points(i, j) = kNaN;
        table.missing_mask(i, j) = true;
        ++local.missing_cells;
      } else if (parse_number(cell, value)) {
        table.points(i, j) = value;
        table.missing_mask(i, j) = false;
      } else {
        table.points(i, j) = kNaN;
        table.missing_mask(i, j) = true;
        ++local.missing_cells;
        ++local.malformed_cells;
      }
    }
  }
  table.validate();
  if (report) *report = local;
  return table;
}

namespace {

EmbeddedDataset bundle_from_json(const nlohmann::json& doc, LoadReport* report) {
  if (!doc.is_object()) throw InputError("dataset bundle must be a JSON object");
  if (!doc.contains("features") || !doc.contains("points")) {
    throw InputError("dataset bundle needs 'features' and 'points'");
  }
  EmbeddedDataset ds;
  auto& table = ds.table;
  for (const auto& f : doc.at("features")) table.feature_names.push_back(f.get<std::string>());
  const auto& pts = doc.at("points");
  const auto n = static_cast<Eigen::Index>(pts.size());
  const auto d = static_cast<Eigen::Index>(table.feature_names.size());
  if (d == 0) throw InputError("dataset bundle has zero features");
  table.points.resize(n, d);
  table.missing_mask.resize(n, d);
  LoadReport local;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = pts[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw InputError("ragged row " + std::to_string(i) + " in dataset bundle");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& cell = row[static_cast<std::size_t>(j)];
      if (cell.is_number()) {
        table.points(i, j) = cell.get<double>();
        table.missing_mask(i, j) = false;
        continue;
      }
      table.points(i, j) = kNaN;
      table.missing_mask(i, j) = true;
      ++local.missing_cells;
      if (!(cell.is_null() || (cell.is_string() && is_missing_token(cell.get<std::string>())))) {
        ++local.malformed_cells;
      }
    }
  }
  if (doc.contains("ids") && !doc.at("ids").is_null()) {
    for (const auto& id : doc.at("ids")) {
      table.point_ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) table.point_ids.push_back(std::to_string(i));
  }
  if (doc.contains("coords2d") && !doc.at("coords2d").is_null()) {
    const auto& coords = doc.at("coords2d");
    ds.coords2d.resize(static_cast<Eigen::Index>(coords.size()), 2);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].size() != 2) throw InputError("coords2d entries must be [x, y]");
      ds.coords2d(static_cast<Eigen::Index>(i), 0) = coords[i][0].get<double>();
      ds.coords2d(static_cast<Eigen::Index>(i), 1) = coords[i][1].get<double>();
    }
  }
  if (doc.contains("labels") && !doc.at("labels").is_null()) {
    ds.labels = doc.at("labels").get<std::vector<int>>();
  }
  ds.validate();
  if (report) *report = local;
  return ds;
}

}  // namespace

DataTable load_table(const std::filesystem::path& source, TableFormat format, LoadReport* report) {
  const auto text = read_file(source);
  if (format == TableFormat::csv) {
    const char delimiter = source.extension() == ".tsv" ? '\t' : ',';
    return parse_delimited(text, delimiter, report);
  }
  try {
    return bundle_from_json(nlohmann::json::parse(text), report).table;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON bundle: ") + e.what());
  }
}

EmbeddedDataset parse_bundle(const nlohmann::json& doc) {
  try {
    return bundle_from_json(doc, nullptr);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON bundle: ") + e.what());
  }
}

EmbeddedDataset load_bundle(const std::filesystem::path& source) {
  const auto text = read_file(source);
  try {
    return bundle_from_json(nlohmann::json::parse(text), nullptr);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON bundle: ") + e.what());
  }
}

void save_bundle(const EmbeddedDataset& dataset, const std::filesystem::path& target) {
  dataset.validate();
  const auto& t = dataset.table;
  nlohmann::json doc;
  doc["features"] = t.feature_names;
  auto& pts = doc["points"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (t.missing_mask(i, j)) row.push_back(nullptr);
      else row.push_back(t.points(i, j));
    }
    pts.push_back(std::move(row));
  }
  doc["ids"] = t.point_ids;
  if (dataset.has_coords()) {
    auto& coords = doc["coords2d"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < dataset.coords2d.rows(); ++i) {
      coords.push_back({dataset.coords2d(i, 0), dataset.coords2d(i, 1)});
    }
  }
  if (dataset.has_labels()) doc["labels"] = dataset.labels;
  std::ofstream out(target, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + target.string());
  out << doc.dump();
}

DataTable filter_missing(const DataTable& table, double feature_thresh, double point_thresh) {
  const auto keep = filter_indices(table, feature_thresh, point_thresh);
  return select(table, keep.rows, keep.cols);
}

EmbeddedDataset filter_missing(const EmbeddedDataset& dataset, double feature_thresh,
                               double point_thresh) {
  const auto keep = filter_indices(dataset.table, feature_thresh, point_thresh);
  EmbeddedDataset out;
  out.table = select(dataset.table, keep.rows, keep.cols);
  if (dataset.has_coords()) {
    out.coords2d.resize(static_cast<Eigen::Index>(keep.rows.size()), 2);
    for (std::size_t i = 0; i < keep.rows.size(); ++i) {
      out.coords2d.row(static_cast<Eigen::Index>(i)) = dataset.coords2d.row(keep.rows[i]);
    }
  }
  if (dataset.has_labels()) {
    // Dropping points may empty a cluster; relabel to keep ids compact.
    std::vector<int> kept;
    for (auto i : keep.rows) kept.push_back(dataset.labels[static_cast<std::size_t>(i)]);
    std::vector<int> remap(static_cast<std::size_t>(std::max(dataset.cluster_count(), 0)), -1);
    int next = 0;
    std::vector<bool> present(remap.size(), false);
    for (int l : kept) if (l >= 0) present[static_cast<std::size_t>(l)] = true;
    for (std::size_t c = 0; c < remap.size(); ++c) if (present[c]) remap[c] = next++;
    for (int& l : kept) if (l >= 0) l = remap[static_cast<std::size_t>(l)];
    out.labels = std::move(kept);
  }
  return out;
}

DataTable impute_mean(const DataTable& table) {
  table.validate();
  DataTable out = table;
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      if (!table.missing_mask(i, j)) {
        sum += table.points(i, j);
        ++observed;
      }
    }
    if (observed == 0) throw InputError("feature '" + table.feature_names[static_cast<std::size_t>(j)] + "' has no observed values");
    const double mean = sum / static_cast<double>(observed);
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      if (table.missing_mask(i, j)) out.points(i, j) = mean;
    }
  }
  out.missing_mask.setConstant(false);
  return out;
}

DataTable standardize(const DataTable& table) {
  table.validate();
  if (table.missing_count() > 0) throw InputError("standardize requires a table without missing values");
  DataTable out = table;
  const Eigen::RowVectorXd mean = table.points.colwise().mean();
  out.points.rowwise() -= mean;
  const Eigen::RowVectorXd sd =
      (out.points.array().square().colwise().sum() / static_cast<double>(table.rows())).sqrt();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (sd(j) > 0.0) out.points.col(j) /= sd(j);
    else out.points.col(j).setZero();
  }
  return out;
}

}  // namespace ccpca
