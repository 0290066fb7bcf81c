#pragma once

#include "ccpca/analysis.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace ccpca {

class UnknownSession : public InputError {
 public:
  using InputError::InputError;
};

/// Applies recognized keys of a JSON parameter object onto `options`:
/// eps, min_pts, gamma, q, alpha_min, alpha_max, delta, agg, top_k, threads,
/// standardize, filter_features, filter_points.
void apply_params(AnalysisOptions& options, const Json& params);

/// In-memory analysis sessions. Each session has one writer at a time; readers work on
/// an immutable snapshot, and derived results are cached per revision.
class SessionStore {
 public:
  SessionStore() = default;
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Preprocesses the dataset with `options` and creates a session at revision 0. When
  /// DBSCAN parameters are given and the dataset has coords2d, its labels are recomputed.
  std::string open_session(EmbeddedDataset dataset, AnalysisOptions options);

  /// {id, revision, points, features, labels, coords2d?, params}
  Json describe(const std::string& id) const;
  long revision(const std::string& id) const;

  /// Re-runs DBSCAN with new parameters. Returns {labels, revision}.
  Json run_clustering(const std::string& id, const ClusterParams& params);
  /// Moves the given points into a new cluster. Returns {revision, cluster}.
  Json add_cluster(const std::string& id, const std::vector<Eigen::Index>& points);
  /// Updates analysis knobs; preprocessing keys are rejected. Returns {revision}.
  Json update_params(const std::string& id, const Json& params);

  /// Full analysis of the current revision (same document as the batch CLI) plus "revision".
  Json heatmap(const std::string& id);
  /// `feature` is a feature name, a group label from the heatmap, or a column index;
  /// `cluster` is a cluster id or "Z".
  Json histogram(const std::string& id, const std::string& feature, const std::string& cluster);
  Json cluster_summary(const std::string& id, const std::string& cluster);

  /// Blocks until the session's revision differs from `seen`, the timeout passes or the
  /// store is shut down.
  long wait_for_change(const std::string& id, long seen, std::chrono::milliseconds timeout) const;

  /// Wakes every waiter and makes later waits return immediately.
  void shutdown();

 private:
  struct Snapshot {
    EmbeddedDataset dataset;
    AnalysisOptions options;
    long revision = 0;
  };

  struct Session {
    std::string id;
    mutable std::mutex state_mutex;           // guards snapshot and cache pointers
    std::mutex write_mutex;                   // serializes writers
    std::mutex compute_mutex;                 // one analysis computation at a time
    mutable std::condition_variable changed;
    std::shared_ptr<const Snapshot> snapshot;
    std::shared_ptr<const Json> cached;
    std::shared_ptr<const AnalysisResult> cached_result;
    long cached_revision = -1;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  static std::shared_ptr<const Snapshot> current(const Session& session);
  void publish(Session& session, std::shared_ptr<const Snapshot> next);

  struct Computed {
    std::shared_ptr<const Snapshot> snapshot;
    std::shared_ptr<const AnalysisResult> result;
    std::shared_ptr<const Json> document;
  };
  Computed compute(Session& session);

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_id_ = 1;
  std::atomic<bool> closing_{false};
};

/// Parses a cluster reference: an integer id or "Z" for noise.
int parse_cluster_ref(const std::string& text);

}  // namespace ccpca
