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

// Deterministic discrete-event cluster simulator.
//
// Pending events are ordered by (virtual time, insertion order). After every
// event the scheduler runs one plan cycle. The engine consumes no randomness;
// identical inputs give byte-identical canonical logs.
//
// Runtime model: a rigid job on n nodes of speed s finishes after
// job_duration_ms(work, s, n). Elastic jobs integrate workers * speed * dt
// between rescales and finish at the first millisecond where credited work
// reaches the requirement. Staging delay for datasets is part of the run and
// counts against the walltime, which is measured from JobStarted.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "hybridsched/catalog.hpp"
#include "hybridsched/domain.hpp"
#include "hybridsched/event_log.hpp"
#include "hybridsched/scheduler.hpp"

namespace hybridsched {

struct SimConfig {
  SchedulerConfig scheduler;
  /// Requeues allowed after NodeLost before the job fails.
  std::int64_t retry_budget = 1;
  TimeMs horizon_ms = 10'000'000'000;
};

struct TraceJob {
  TimeMs t_ms = 0;
  JobSpec spec;
};

struct FaultDirective {
  TimeMs t_ms = 0;
  std::string cluster_id;
  int node_index = 0;
  TimeMs down_ms = 1;
};

struct SubmissionTrace {
  std::vector<TraceJob> jobs;
  std::vector<FaultDirective> faults;
  std::uint64_t rng_seed = 0;
};

/// One plan cycle that left a job blocked with a reservation, plus the
/// expected-free time of every node when the plan ran. Used by tests to
/// check reservations against an independent oracle.
struct PlanObservation {
  TimeMs now_ms = 0;
  Reservation reservation;
  std::vector<std::string> acceptable_clusters;
  std::int64_t need = 0;
};

class Simulator {
 public:
  Simulator(std::vector<ClusterSpec> clusters, SimConfig config,
            const DatasetCatalog* catalog = nullptr);

  /// Validates every trace job and fault up front, then schedules them.
  /// Job ids are assigned in trace order. Throws InvalidInput (with the
  /// underlying reason) on the first bad entry.
  void load(const SubmissionTrace& trace);

  /// Submits a job at the current clock (service path) and runs a plan
  /// cycle. Returns the new job id.
  JobId submit(const JobSpec& spec);

  /// Processes every pending event with time <= until_ms, then sets the
  /// clock to until_ms (never backwards). Returns the events emitted.
  std::vector<SimEvent> step(TimeMs until_ms);

  /// Runs until no events remain and every job is terminal.
  /// Throws NonTerminating past the horizon or on a stalled queue.
  void run();

  void inject_node_failure(const std::string& cluster_id, int node_index,
                           TimeMs at_ms, TimeMs down_ms);

  /// Throws UnknownJob or AlreadyTerminal.
  JobState cancel(JobId job_id);

  /// Runs a plan cycle at the current clock (e.g. after capacity returns).
  void replan();

  TimeMs now() const { return now_; }
  bool idle() const;
  const EventLog& log() const { return log_; }
  const std::map<JobId, JobRecord>& jobs() const { return jobs_; }
  const JobRecord& job(JobId job_id) const;
  const Scheduler& scheduler() const { return scheduler_; }
  Scheduler& scheduler() { return scheduler_; }
  const std::vector<ClusterSpec>& cluster_specs() const { return specs_; }
  const SimConfig& config() const { return config_; }

  void set_plan_observer(std::function<void(const PlanObservation&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  enum class PendingKind { Submit, JobEnd, NodeDown, NodeUp };

  struct Pending {
    TimeMs t_ms = 0;
    std::int64_t order = 0;
    PendingKind kind = PendingKind::Submit;
    JobId job_id = 0;
    std::int64_t generation = 0;
    std::string cluster_id;
    int node_index = 0;
    TimeMs down_ms = 0;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.t_ms != b.t_ms) return a.t_ms > b.t_ms;
      return a.order > b.order;
    }
  };

  // Per running job: progress accounting and the current end event.
  struct RunState {
    std::int64_t generation = 0;
    TimeMs compute_start_ms = 0;
    TimeMs credited_until_ms = 0;
    std::int64_t credited_milli = 0;
    std::int64_t required_milli = 0;
    std::int64_t speed = 1;
    std::int64_t workers = 0;
    TimeMs deadline_ms = 0;  // start + walltime
    bool will_time_out = false;
  };

  void push(Pending p);
  SimEvent& emit(EventKind kind, std::optional<JobId> job = std::nullopt);
  void process(const Pending& p);
  void on_submit(JobId job_id);
  void on_job_end(JobId job_id);
  void on_node_down(const std::string& cluster_id, int node, TimeMs down_ms);
  void plan_cycle();
  void start_job(const Allocation& alloc);
  void credit(JobId job_id);
  void schedule_end(JobId job_id);
  void finish_job(JobId job_id, LifecycleEvent event, EventKind kind);
  void check_submittable(const JobSpec& spec) const;
  void record_workers(JobId job_id);

  std::vector<ClusterSpec> specs_;
  SimConfig config_;
  const DatasetCatalog* catalog_;
  Scheduler scheduler_;
  std::priority_queue<Pending, std::vector<Pending>, Later> pending_;
  std::int64_t next_order_ = 0;
  TimeMs now_ = 0;
  EventLog log_;
  std::map<JobId, JobRecord> jobs_;
  std::map<JobId, JobSpec> unsubmitted_;
  std::map<JobId, RunState> runs_;
  JobId next_job_id_ = 1;
  std::int64_t live_jobs_ = 0;
  std::function<void(const PlanObservation&)> observer_;
};

struct RunResult {
  EventLog log;
  std::map<JobId, JobRecord> jobs;
};

RunResult run_trace(const SubmissionTrace& trace,
                    const std::vector<ClusterSpec>& clusters,
                    const SimConfig& config);

// File formats.
//
// Trace: {"rng_seed": N, "jobs": [{"t_ms": T, "spec": JobSpec}...],
//         "faults": [{"t_ms", "cluster_id", "node_index", "down_ms"}...]}
// Clusters: {"clusters": [ClusterSpec...], "config": {"backfill",
//            "hybrid_rigid_on_cloud", "retry_budget", "horizon_ms"}}
//           or a bare array of ClusterSpec.
SubmissionTrace parse_trace(const nlohmann::json& j);
nlohmann::json to_json(const SubmissionTrace& trace);

struct ClusterFile {
  std::vector<ClusterSpec> clusters;
  SimConfig config;
};
ClusterFile parse_cluster_file(const nlohmann::json& j);

}  // namespace hybridsched
