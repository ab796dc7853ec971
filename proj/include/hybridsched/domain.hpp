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

// Shared domain types: resource kinds, job specs and records, cluster specs,
// the job lifecycle state machine and the linear runtime model.
//
// All virtual time is integer milliseconds. Nothing in scheduling or
// simulation uses floating point.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hybridsched/error.hpp"

namespace hybridsched {

using TimeMs = std::int64_t;
using JobId = std::int64_t;

enum class ResourceKind { Cpu, Gpu, Knl, Cloud };

inline constexpr std::array kAllKinds = {ResourceKind::Cpu, ResourceKind::Gpu,
                                         ResourceKind::Knl,
                                         ResourceKind::Cloud};

std::string_view to_string(ResourceKind kind);
/// Throws ParseError for anything outside {cpu, gpu, knl, cloud}.
ResourceKind parse_kind(std::string_view text);

struct RigidShape {
  std::int64_t node_count = 1;
  bool operator==(const RigidShape&) const = default;
};

struct ElasticShape {
  std::int64_t min_workers = 1;
  std::int64_t max_workers = 1;
  bool operator==(const ElasticShape&) const = default;
};

using JobShape = std::variant<RigidShape, ElasticShape>;

inline bool is_elastic(const JobShape& shape) {
  return std::holds_alternative<ElasticShape>(shape);
}

/// Nodes a job needs to start: node_count for rigid, min_workers for elastic.
std::int64_t start_nodes(const JobShape& shape);
/// Largest number of nodes a job can ever hold.
std::int64_t peak_nodes(const JobShape& shape);

struct JobSpec {
  std::string name;
  std::string user_id;
  std::vector<ResourceKind> kind_preferences;
  JobShape shape = RigidShape{};
  std::int64_t work_units = 1;
  TimeMs walltime_limit_ms = 1;
  std::vector<std::string> dataset_refs;
  std::int64_t priority = 0;

  bool operator==(const JobSpec&) const = default;
};

enum class JobState {
  Submitted,
  Queued,
  Dispatched,
  Running,
  Completed,
  Failed,
  Cancelled,
  TimedOut,
};

inline constexpr std::array kAllStates = {
    JobState::Submitted, JobState::Queued,    JobState::Dispatched,
    JobState::Running,   JobState::Completed, JobState::Failed,
    JobState::Cancelled, JobState::TimedOut};

enum class LifecycleEvent {
  Validated,
  Scheduled,
  Started,
  Finished,
  Errored,
  CancelRequested,
  WalltimeExceeded,
  NodeLost,
};

inline constexpr std::array kAllEvents = {
    LifecycleEvent::Validated,        LifecycleEvent::Scheduled,
    LifecycleEvent::Started,          LifecycleEvent::Finished,
    LifecycleEvent::Errored,          LifecycleEvent::CancelRequested,
    LifecycleEvent::WalltimeExceeded, LifecycleEvent::NodeLost};

std::string_view to_string(JobState state);
std::string_view to_string(LifecycleEvent event);
bool is_terminal(JobState state);

/// Applies one lifecycle event. `retry_available` only matters for NodeLost
/// on a Running job: true requeues, false fails the job.
/// Throws InvalidTransition for every pair outside the table.
JobState transition(JobState state, LifecycleEvent event,
                    bool retry_available = true);

struct ClusterSpec {
  std::string cluster_id;
  ResourceKind kind = ResourceKind::Cpu;
  std::int64_t node_count = 1;
  std::int64_t cores_per_node = 1;
  /// Work units per node per virtual second.
  std::int64_t speed_factor = 1;

  bool operator==(const ClusterSpec&) const = default;
};

/// Throws NonPositive or InvalidInput (duplicate ids, empty id).
void validate_clusters(const std::vector<ClusterSpec>& clusters);

struct Allocation {
  JobId job_id = 0;
  std::string cluster_id;
  std::vector<int> node_indices;  // sorted ascending
  TimeMs start_ms = 0;

  bool operator==(const Allocation&) const = default;
};

enum class Layer { Hpc, Cloud };
std::string_view to_string(Layer layer);

struct WorkerSample {
  TimeMs time_ms = 0;
  std::int64_t workers = 0;
  bool operator==(const WorkerSample&) const = default;
};

struct JobRecord {
  JobId job_id = 0;
  JobSpec spec;
  JobState state = JobState::Submitted;
  Layer layer = Layer::Hpc;
  std::optional<TimeMs> submit_ms;
  std::optional<TimeMs> start_ms;
  std::optional<TimeMs> end_ms;
  std::optional<Allocation> allocation;
  std::vector<WorkerSample> worker_history;

  // Bookkeeping kept after the allocation is retired, for result manifests.
  std::string last_cluster_id;
  std::vector<int> last_nodes;
  std::int64_t retries_used = 0;
  /// Credited work in milli-units (1000 per work unit).
  std::int64_t credited_work_milli = 0;
};

/// Checks every JobSpec invariant and that each preferred kind is offered.
/// Returns the spec unchanged on success.
JobSpec validate_job(const JobSpec& spec,
                     const std::set<ResourceKind>& known_kinds);

/// ceil(1000 * work_units / (speed_factor * nodes)), at least 1.
/// Throws NonPositive for arguments < 1 and Overflow if 1000 * work_units or
/// speed_factor * nodes does not fit in 64 bits.
TimeMs job_duration_ms(std::int64_t work_units, std::int64_t speed_factor,
                       std::int64_t nodes);

/// Integer ceiling division for non-negative numerator, positive divisor.
constexpr std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return num / den + (num % den != 0 ? 1 : 0);
}

// JSON encodings. parse_job_spec is strict: unknown fields, wrong types and
// missing required fields throw ParseError.
nlohmann::json to_json(const JobSpec& spec);
JobSpec parse_job_spec(const nlohmann::json& j);
nlohmann::json to_json(const ClusterSpec& spec);
ClusterSpec parse_cluster_spec(const nlohmann::json& j);
nlohmann::json to_json(const JobRecord& record);

}  // namespace hybridsched
