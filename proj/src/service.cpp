#include "ccpca/service.hpp"

#include <algorithm>
#include <charconv>

namespace ccpca {

namespace {

template <typename T>
T get_as(const Json& params, const char* key) {
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("parameter '") + key + "' has the wrong type");
  }
}

}  // namespace

void apply_params(AnalysisOptions& options, const Json& params) {
  if (params.is_null()) return;
  if (!params.is_object()) throw InputError("params must be a JSON object");
  if (params.contains("eps") || params.contains("min_pts")) {
    ClusterParams cp = options.clustering.value_or(ClusterParams{});
    if (params.contains("eps")) cp.eps = get_as<double>(params, "eps");
    if (params.contains("min_pts")) cp.min_pts = get_as<int>(params, "min_pts");
    cp.validate();
    options.clustering = cp;
  }
  if (params.contains("gamma")) options.gamma = get_as<double>(params, "gamma");
  if (params.contains("q")) options.q = get_as<int>(params, "q");
  if (params.contains("alpha_min")) options.alpha_min = get_as<double>(params, "alpha_min");
  if (params.contains("alpha_max")) options.alpha_max = get_as<double>(params, "alpha_max");
  if (params.contains("delta")) options.delta = get_as<int>(params, "delta");
  if (params.contains("agg")) options.aggregation = parse_aggregation_mode(get_as<std::string>(params, "agg"));
  if (params.contains("top_k")) options.top_k = get_as<int>(params, "top_k");
  if (params.contains("threads")) options.threads = get_as<unsigned>(params, "threads");
  if (params.contains("standardize")) options.standardize = get_as<bool>(params, "standardize");
  if (params.contains("filter_features") || params.contains("filter_points")) {
    MissingFilter f = options.filter.value_or(MissingFilter{});
    if (params.contains("filter_features")) f.feature_thresh = get_as<double>(params, "filter_features");
    if (params.contains("filter_points")) f.point_thresh = get_as<double>(params, "filter_points");
    options.filter = f;
  }
  if (!(options.gamma >= 0.0)) throw InputError("gamma must be non-negative");
  if (options.delta < 1) throw InputError("delta must be at least 1");
  if (options.top_k < 0) throw InputError("top_k must be non-negative");
  alpha_grid(options.q, options.alpha_min, options.alpha_max);  // validates the range
}

int parse_cluster_ref(const std::string& text) {
  if (text == "Z" || text == "z") return kNoiseLabel;
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw InputError("invalid cluster reference '" + text + "'");
  return value;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<const SessionStore::Snapshot> SessionStore::current(const Session& session) {
  std::lock_guard lock(session.state_mutex);
  return session.snapshot;
}

void SessionStore::publish(Session& session, std::shared_ptr<const Snapshot> next) {
  {
    std::lock_guard lock(session.state_mutex);
    session.snapshot = std::move(next);
  }
  session.changed.notify_all();
}

std::string SessionStore::open_session(EmbeddedDataset dataset, AnalysisOptions options) {
  auto snap = std::make_shared<Snapshot>();
  snap->dataset = preprocess(std::move(dataset), options);
  if (options.clustering && snap->dataset.has_coords()) {
    snap->dataset.labels = dbscan(snap->dataset.coords2d, *options.clustering);
  }
  snap->options = std::move(options);
  auto session = std::make_shared<Session>();
  session->snapshot = std::move(snap);
  std::unique_lock lock(sessions_mutex_);
  session->id = "s" + std::to_string(next_id_++);
  sessions_.emplace(session->id, session);
  return session->id;
}

Json SessionStore::describe(const std::string& id) const {
  const auto session = find(id);
  const auto snap = current(*session);
  Json out;
  out["id"] = id;
  out["revision"] = snap->revision;
  out["points"] = snap->dataset.table.rows();
  out["features"] = snap->dataset.table.feature_names;
  out["labels"] = snap->dataset.has_labels() ? labels_json(snap->dataset.labels) : Json(nullptr);
  if (snap->dataset.has_coords()) {
    auto coords = Json::array();
    for (Eigen::Index i = 0; i < snap->dataset.coords2d.rows(); ++i) {
      coords.push_back({snap->dataset.coords2d(i, 0), snap->dataset.coords2d(i, 1)});
    }
    out["coords2d"] = std::move(coords);
  }
  out["params"] = options_json(snap->options);
  return out;
}

long SessionStore::revision(const std::string& id) const { return current(*find(id))->revision; }

Json SessionStore::run_clustering(const std::string& id, const ClusterParams& params) {
  params.validate();
  const auto session = find(id);
  std::lock_guard writer(session->write_mutex);
  const auto snap = current(*session);
  if (!snap->dataset.has_coords()) throw InputError("session has no 2D embedding to cluster");
  auto next = std::make_shared<Snapshot>(*snap);
  next->dataset.labels = dbscan(next->dataset.coords2d, params);
  next->options.clustering = params;
  next->revision = snap->revision + 1;
  Json out{{"labels", labels_json(next->dataset.labels)}, {"revision", next->revision}};
  publish(*session, std::move(next));
  return out;
}

Json SessionStore::add_cluster(const std::string& id, const std::vector<Eigen::Index>& points) {
  if (points.empty()) throw InputError("a new cluster needs at least one point");
  const auto session = find(id);
  std::lock_guard writer(session->write_mutex);
  const auto snap = current(*session);
  auto next = std::make_shared<Snapshot>(*snap);
  next->dataset = add_manual_cluster(snap->dataset, points);
  next->revision = snap->revision + 1;
  Json out{{"revision", next->revision},
           {"cluster", next->dataset.labels[static_cast<std::size_t>(points.front())]}};
  publish(*session, std::move(next));
  return out;
}

Json SessionStore::update_params(const std::string& id, const Json& params) {
  if (params.is_object() &&
      (params.contains("standardize") || params.contains("filter_features") || params.contains("filter_points"))) {
    throw InputError("preprocessing parameters are fixed when the session is opened");
  }
  const auto session = find(id);
  std::lock_guard writer(session->write_mutex);
  const auto snap = current(*session);
  auto next = std::make_shared<Snapshot>(*snap);
  apply_params(next->options, params);
  next->revision = snap->revision + 1;
  Json out{{"revision", next->revision}};
  publish(*session, std::move(next));
  return out;
}

SessionStore::Computed SessionStore::compute(Session& session) {
  std::lock_guard compute_lock(session.compute_mutex);
  const auto snap = current(session);
  {
    std::lock_guard lock(session.state_mutex);
    if (session.cached_revision == snap->revision) return {snap, session.cached_result, session.cached};
  }
  if (!snap->dataset.has_labels() || snap->dataset.analysis_clusters().empty()) {
    throw InputError("session has no clusters; run clustering or add a cluster first");
  }
  auto result = std::make_shared<const AnalysisResult>(analyze_labeled(snap->dataset, snap->options));
  auto doc = std::make_shared<Json>(to_json(*result, snap->options));
  (*doc)["revision"] = snap->revision;
  std::shared_ptr<const Json> frozen = std::move(doc);
  {
    std::lock_guard lock(session.state_mutex);
    if (snap->revision >= session.cached_revision) {
      session.cached_revision = snap->revision;
      session.cached_result = result;
      session.cached = frozen;
    }
  }
  return {snap, result, frozen};
}

Json SessionStore::heatmap(const std::string& id) {
  const auto session = find(id);
  return *compute(*session).document;
}

namespace {

Eigen::Index resolve_feature(const EmbeddedDataset& dataset, const AnalysisResult* result, const std::string& feature) {
  const auto& names = dataset.table.feature_names;
  if (auto it = std::find(names.begin(), names.end(), feature); it != names.end()) {
    return static_cast<Eigen::Index>(it - names.begin());
  }
  if (result) {
    for (const auto& g : result->layout.groups) {
      if (g.display_label == feature) return g.representative;
    }
  }
  Eigen::Index index = -1;
  auto [ptr, ec] = std::from_chars(feature.data(), feature.data() + feature.size(), index);
  if (ec == std::errc() && ptr == feature.data() + feature.size() && index >= 0 && index < dataset.table.cols()) {
    return index;
  }
  throw InputError("unknown feature '" + feature + "'");
}

}  // namespace

Json SessionStore::histogram(const std::string& id, const std::string& feature, const std::string& cluster) {
  const auto session = find(id);
  const int cluster_id = parse_cluster_ref(cluster);
  auto snap = current(*session);
  std::shared_ptr<const AnalysisResult> result;
  const auto& names = snap->dataset.table.feature_names;
  if (std::find(names.begin(), names.end(), feature) == names.end()) {
    // Might be an aggregated group label; that needs the layout.
    auto computed = compute(*session);
    snap = computed.snapshot;
    result = computed.result;
  }
  const auto f = resolve_feature(snap->dataset, result.get(), feature);
  Json out = to_json(feature_histogram(snap->dataset, f, cluster_id));
  out["feature"] = names[static_cast<std::size_t>(f)];
  out["cluster"] = cluster_id;
  out["revision"] = snap->revision;
  return out;
}

Json SessionStore::cluster_summary(const std::string& id, const std::string& cluster) {
  const auto session = find(id);
  const int cluster_id = parse_cluster_ref(cluster);
  const auto computed = compute(*session);
  const auto& result = *computed.result;
  const auto it = std::find_if(result.clusters.begin(), result.clusters.end(),
                               [&](const ClusterAnalysis& c) { return c.cluster_id == cluster_id; });
  if (it == result.clusters.end()) throw InputError("unknown cluster '" + cluster + "'");

  Json out;
  out["revision"] = computed.snapshot->revision;
  out["cluster"] = cluster_id;
  out["name"] = cluster_name(cluster_id);
  out["alpha"] = number_json(it->fit.alpha);
  out["D"] = number_json(it->scan.chosen().discrepancy);
  out["V"] = number_json(it->scan.chosen().variance);
  out["projection"] = to_json(projection_histogram(result.dataset, it->fit));
  out["top_features"] = Json::array();
  for (const auto& t : it->top) {
    Json entry{{"feature", t.name}, {"fc", number_json(t.value)}};
    entry["histogram"] = to_json(feature_histogram(result.dataset, t.feature, cluster_id));
    out["top_features"].push_back(std::move(entry));
  }
  return out;
}

long SessionStore::wait_for_change(const std::string& id, long seen, std::chrono::milliseconds timeout) const {
  const auto session = find(id);
  std::unique_lock lock(session->state_mutex);
  session->changed.wait_for(lock, timeout, [&] { return closing_ || session->snapshot->revision != seen; });
  return session->snapshot->revision;
}

void SessionStore::shutdown() {
  closing_ = true;
  std::shared_lock lock(sessions_mutex_);
  for (auto& [id, s] : sessions_) {
    // Taking the state lock orders the flag against a waiter's predicate check.
    { std::lock_guard state(s->state_mutex); }
    s->changed.notify_all();
  }
}

}  // namespace ccpca
