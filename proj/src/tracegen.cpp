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

#include "hybridsched/tracegen.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace hybridsched {

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // rejection sampling keeps the draw unbiased
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

SubmissionTrace generate_trace(const std::vector<ClusterSpec>& clusters,
                               const TraceGenOptions& options, std::uint64_t seed) {
  validate_clusters(clusters);
  Rng rng(seed);
  SubmissionTrace trace;
  trace.rng_seed = seed;

  std::map<ResourceKind, std::int64_t> largest, slowest;
  for (const auto& c : clusters) {
    largest[c.kind] = std::max(largest[c.kind], c.node_count);
    auto [it, fresh] = slowest.emplace(c.kind, c.speed_factor);
    if (!fresh) it->second = std::min(it->second, c.speed_factor);
  }
  std::vector<ResourceKind> rigid_kinds;
  for (const auto& [kind, _] : largest) {
    if (kind != ResourceKind::Cloud || options.rigid_may_use_cloud) {
      rigid_kinds.push_back(kind);
    }
  }
  bool has_cloud = largest.contains(ResourceKind::Cloud);

  TimeMs t = 0;
  for (std::int64_t i = 0; i < options.jobs; ++i) {
    t += rng.uniform(0, options.max_gap_ms);
    JobSpec spec;
    spec.name = "job-" + std::to_string(i);
    spec.user_id = "user-" + std::to_string(rng.uniform(0, 3));
    spec.work_units = rng.uniform(options.min_work, options.max_work);
    spec.priority = rng.uniform(0, std::max<std::int64_t>(1, options.priority_levels) - 1);

    std::int64_t nodes_for_estimate = 1;
    std::int64_t speed_for_estimate = 1;
    bool elastic = has_cloud && (rigid_kinds.empty() || rng.chance(options.elastic_permille));
    if (elastic) {
      auto cap = std::min(options.max_nodes, largest[ResourceKind::Cloud]);
      auto lo = rng.uniform(1, cap);
      auto hi = rng.uniform(lo, cap);
      spec.shape = ElasticShape{lo, hi};
      spec.kind_preferences = {ResourceKind::Cloud};
      nodes_for_estimate = lo;
      speed_for_estimate = slowest[ResourceKind::Cloud];
    } else {
      auto kinds = rigid_kinds;
      for (std::size_t k = kinds.size(); k > 1; --k) {
        auto j = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(k) - 1));
        std::swap(kinds[k - 1], kinds[j]);
      }
      kinds.resize(static_cast<std::size_t>(
          rng.uniform(1, static_cast<std::int64_t>(kinds.size()))));
      std::int64_t cap = 0;
      speed_for_estimate = std::numeric_limits<std::int64_t>::max();
      for (auto k : kinds) {
        cap = std::max(cap, largest[k]);
        speed_for_estimate = std::min(speed_for_estimate, slowest[k]);
      }
      cap = std::min(cap, options.max_nodes);
      // the first kind must be able to host the job; others may be smaller
      cap = std::min(cap, std::max<std::int64_t>(1, largest[kinds.front()]));
      nodes_for_estimate = rng.uniform(1, cap);
      spec.shape = RigidShape{nodes_for_estimate};
      spec.kind_preferences = kinds;
    }
    auto runtime = job_duration_ms(spec.work_units, speed_for_estimate, nodes_for_estimate);
    if (rng.chance(options.short_walltime_permille)) {
      spec.walltime_limit_ms = std::max<TimeMs>(1, runtime / 2);
    } else if (options.exact_walltime) {
      spec.walltime_limit_ms = runtime;
    } else {
      spec.walltime_limit_ms =
          ceil_div(runtime * (100 + rng.uniform(0, options.walltime_slack_percent)), 100);
    }
    trace.jobs.push_back({t, std::move(spec)});
  }

  for (std::int64_t f = 0; f < options.faults && !clusters.empty(); ++f) {
    const auto& c = clusters[static_cast<std::size_t>(
        rng.uniform(0, static_cast<std::int64_t>(clusters.size()) - 1))];
    FaultDirective fault;
    fault.t_ms = rng.uniform(0, std::max<TimeMs>(t, 1));
    fault.cluster_id = c.cluster_id;
    fault.node_index = static_cast<int>(rng.uniform(0, c.node_count - 1));
    fault.down_ms = rng.uniform(1, options.max_down_ms);
    trace.faults.push_back(fault);
  }
  return trace;
}

}  // namespace hybridsched
