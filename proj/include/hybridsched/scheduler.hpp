// Copyright 2026 The HybridSched Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Resource scheduling component.
//
// Holds the job queue and the node-level state of every typed cluster, and
// decides which queued jobs start where. Policy: priority then FIFO, a single
// reservation for the first blocked job, and backfilling of later jobs that
// cannot delay that reservation. Nodes are packed first-fit by ascending
// index; clusters of one kind are scanned in cluster_id order.
//
// Elastic jobs hold a fixed core of min_workers nodes plus surplus nodes that
// the scheduler may reclaim at any time. Surplus nodes therefore count as
// available when planning.
//
// The scheduler never touches job lifecycle state; the caller drives the
// state machine from the decisions returned here.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hybridsched/domain.hpp"

namespace hybridsched {

inline constexpr TimeMs kNever = std::numeric_limits<TimeMs>::max();

struct SchedulerConfig {
  bool backfill = true;
  /// Rigid jobs that list cloud may run on cloud clusters.
  bool hybrid_rigid_on_cloud = false;
  /// Static partitioning baseline: each job only uses its first usable kind.
  bool partitioned = false;
};

struct QueueEntry {
  JobId job_id = 0;
  std::int64_t priority = 0;
  std::int64_t submit_seq = 0;
  std::vector<ResourceKind> remaining_kind_preferences;
};

/// Strict total order by (-priority, submit_seq, job_id).
struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.submit_seq != b.submit_seq) return a.submit_seq < b.submit_seq;
    return a.job_id < b.job_id;
  }
};

struct Reservation {
  JobId job_id = 0;
  std::string cluster_id;
  std::vector<int> node_indices;
  TimeMs start_ms = 0;
  TimeMs expected_end_ms = 0;

  bool operator==(const Reservation&) const = default;
};

/// Surplus nodes taken back from a running elastic job.
struct Reclaim {
  JobId job_id = 0;
  std::string cluster_id;
  std::vector<int> node_indices;
};

struct DispatchDecision {
  std::vector<Allocation> starts;
  std::optional<Reservation> reservation;
  std::vector<Reclaim> reclaims;
  /// Jobs needing more nodes than any acceptable cluster owns. Removed from
  /// the queue by apply(); the caller settles their state.
  std::vector<JobId> unsatisfiable;

  bool empty() const {
    return starts.empty() && reclaims.empty() && unsatisfiable.empty();
  }
};

struct RescaleChange {
  JobId job_id = 0;
  std::int64_t from_workers = 0;
  std::int64_t to_workers = 0;
};

/// Node bookkeeping for one cluster, readable by callers.
struct NodeState {
  JobId holder = 0;      // 0 when no job holds the node
  bool surplus = false;  // held by an elastic job beyond its core
  int down_count = 0;    // > 0 while failed
  TimeMs up_at = 0;      // latest scheduled recovery while down
  std::string vcluster;  // non-empty while carved out for a virtual cluster

  bool usable() const { return holder == 0 && down_count == 0 && vcluster.empty(); }
};

struct ClusterState {
  ClusterSpec spec;
  std::vector<NodeState> nodes;

  std::int64_t free_count() const;
  std::int64_t busy_count() const;
  std::int64_t down_count() const;
  std::int64_t vcluster_count() const;
};

struct LiveAllocation {
  Allocation allocation;  // current node set (core + surplus)
  TimeMs expected_end_ms = 0;
  bool elastic = false;
  std::int64_t min_workers = 0;
  std::int64_t max_workers = 0;
  std::int64_t submit_seq = 0;
  std::vector<int> core_nodes;
};

class Scheduler {
 public:
  Scheduler(std::vector<ClusterSpec> clusters, SchedulerConfig config);
  // The queue index points into pending_, so copies relink it.
  Scheduler(const Scheduler& other);
  Scheduler& operator=(const Scheduler& other);
  Scheduler(Scheduler&&) = default;
  Scheduler& operator=(Scheduler&&) = default;

  const SchedulerConfig& config() const { return config_; }
  /// Toggles backfilling for subsequent plan cycles.
  void set_backfill(bool enabled) { config_.backfill = enabled; }

  /// Clusters a job may run on, in scan order: preference order, then
  /// cluster_id. Elastic jobs only see cloud clusters.
  std::vector<std::string> acceptable_clusters(const JobSpec& spec) const;
  bool satisfiable(const JobSpec& spec) const;

  /// Inserts a Queued job. A job that was queued before keeps its original
  /// submit_seq. Throws DuplicateJob if the job is queued or holds nodes.
  QueueEntry enqueue(JobId job_id, const JobSpec& spec, TimeMs now_ms);
  /// Removes a queued job. Returns false if it was not queued.
  bool dequeue(JobId job_id);
  std::vector<QueueEntry> queue() const;
  bool is_queued(JobId job_id) const { return pending_.contains(job_id); }
  std::size_t queue_size() const { return queue_.size(); }

  /// Computes what should start now. Pure with respect to scheduler state.
  DispatchDecision plan(TimeMs now_ms) const;
  /// Commits a decision produced by plan() at the same instant.
  void apply(const DispatchDecision& decision, TimeMs now_ms);

  /// Frees every node of a live allocation. Throws NoAllocation.
  std::vector<int> release(JobId job_id);

  /// Target worker count per running elastic job, by max-min fair sharing of
  /// (free + elastic-held) nodes on each cloud cluster. Only entries whose
  /// count changes are returned.
  std::vector<RescaleChange> plan_rescale() const;
  /// Moves one elastic job to the worker count plan_rescale() gives it,
  /// shrinking by highest surplus index and growing by lowest free index.
  /// Throws NotElastic / NotRunning.
  std::int64_t rescale_elastic(JobId job_id, TimeMs now_ms);
  /// Applies every change from plan_rescale(): shrinks first, then grows.
  std::vector<RescaleChange> rebalance_elastic(TimeMs now_ms);

  struct NodeLoss {
    JobId job_id = 0;
    bool surplus_only = false;  // the job just loses one surplus worker
  };
  /// Marks a node failed until up_at. Reports the job that held it, if any.
  /// A surplus node is removed from its elastic job here; a core or rigid
  /// node leaves the allocation intact for the caller to release.
  std::optional<NodeLoss> mark_down(const std::string& cluster_id, int node,
                                    TimeMs up_at);
  void mark_up(const std::string& cluster_id, int node);

  /// Carves `count` usable nodes (first-fit) out for a virtual cluster.
  /// Throws InsufficientCloudCapacity.
  std::vector<int> carve(const std::string& cluster_id, std::int64_t count,
                         const std::string& vcluster_id);
  std::vector<int> uncarve(const std::string& cluster_id,
                           const std::string& vcluster_id);

  const std::vector<ClusterState>& clusters() const { return clusters_; }
  const ClusterState& cluster(const std::string& cluster_id) const;
  bool has_node(const std::string& cluster_id, int node) const;
  const std::map<JobId, LiveAllocation>& live() const { return live_; }
  const LiveAllocation* live_allocation(JobId job_id) const;
  const std::optional<Reservation>& last_reservation() const {
    return last_reservation_;
  }

 private:
  struct PendingJob {
    QueueEntry entry;
    std::int64_t need = 0;
    TimeMs walltime_ms = 0;
    bool elastic = false;
    std::int64_t min_workers = 0;
    std::int64_t max_workers = 0;
    std::vector<int> clusters;  // indices into clusters_, scan order
    bool fits = false;          // some acceptable cluster owns need nodes
  };

  void relink_queue();
  std::vector<int> acceptable_indices(const JobSpec& spec) const;
  int index_of(const std::string& cluster_id) const;
  std::vector<std::int64_t> elastic_targets(int cluster) const;
  void set_workers(LiveAllocation& live, std::int64_t target);

  SchedulerConfig config_;
  std::vector<ClusterState> clusters_;  // sorted by cluster_id
  std::map<QueueEntry, const PendingJob*, QueueOrder> queue_;
  std::map<JobId, PendingJob> pending_;
  std::int64_t unfit_queued_ = 0;
  std::map<JobId, std::int64_t> seq_of_;
  std::int64_t next_seq_ = 0;
  std::map<JobId, LiveAllocation> live_;
  std::optional<Reservation> last_reservation_;
};

}  // namespace hybridsched
