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

// Efficiency figures computed from event logs: node-time utilization per
// cluster, wait and turnaround statistics, and side-by-side comparison of two
// configurations on the same trace.
//
// Utilization is exact: busy and available node-milliseconds are integers and
// the ratio is only rounded when rendered.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridsched/domain.hpp"
#include "hybridsched/event_log.hpp"
#include "hybridsched/simulator.hpp"

namespace hybridsched {

struct ClusterUtilization {
  std::string cluster_id;  // "*" for the aggregate row
  std::int64_t busy_node_ms = 0;
  std::int64_t available_node_ms = 0;
  std::int64_t down_node_ms = 0;
  std::int64_t vcluster_node_ms = 0;

  /// busy / available in units of 1e-4, rounded half up. 0 when nothing was
  /// available.
  std::int64_t basis_points() const;
  /// Fixed 4-decimal rendering, e.g. "0.5000".
  std::string rendered() const;
};

struct UtilizationReport {
  TimeMs from_ms = 0;
  TimeMs to_ms = 0;
  std::vector<ClusterUtilization> clusters;
  ClusterUtilization aggregate;
};

/// Virtual-cluster carve-out, reported separately and excluded from the
/// scheduler's available node time.
struct VClusterInterval {
  std::string cluster_id;
  std::vector<int> node_indices;
  TimeMs from_ms = 0;
  std::optional<TimeMs> to_ms;
};

/// Throws EmptyWindow when from_ms >= to_ms. Allocations still open at the
/// end of the log are counted up to to_ms.
UtilizationReport utilization(const EventLog& log,
                              const std::vector<ClusterSpec>& clusters,
                              TimeMs from_ms, TimeMs to_ms,
                              const std::vector<VClusterInterval>& vclusters = {});

struct WaitStats {
  std::int64_t jobs = 0;
  std::int64_t started = 0;
  std::int64_t never_started = 0;
  double mean_wait_ms = 0;
  TimeMs median_wait_ms = 0;  // nearest rank
  TimeMs p95_wait_ms = 0;     // nearest rank
  double mean_turnaround_ms = 0;
  TimeMs first_submit_ms = 0;
  TimeMs last_end_ms = 0;
  TimeMs makespan_ms = 0;  // last terminal event - first submission
};

/// Nearest-rank percentile of an ascending-sorted sample; 0 when empty.
TimeMs nearest_rank(const std::vector<TimeMs>& sorted, int percent);

WaitStats wait_stats(const EventLog& log);

struct RunSummary {
  std::string label;
  UtilizationReport utilization;
  WaitStats waits;
};

/// Utilization over the run's own span [first submission, last terminal
/// event]; an empty run reports zeros.
RunSummary summarize(std::string label, const EventLog& log,
                     const std::vector<ClusterSpec>& clusters);

struct Comparison {
  RunSummary a;
  RunSummary b;
  std::int64_t utilization_delta_bp = 0;  // b - a, basis points
  double mean_wait_delta_ms = 0;
  TimeMs makespan_delta_ms = 0;
};

struct Topology {
  std::string label;
  std::vector<ClusterSpec> clusters;
  SimConfig config;
};

/// Runs the same trace through both configurations.
Comparison compare(const SubmissionTrace& trace, const Topology& a,
                   const Topology& b);

nlohmann::json to_json(const UtilizationReport& report);
nlohmann::json to_json(const WaitStats& stats);
nlohmann::json to_json(const Comparison& comparison);
std::string render_table(const UtilizationReport& report, const WaitStats& waits);
std::string render_table(const Comparison& comparison);

}  // namespace hybridsched
