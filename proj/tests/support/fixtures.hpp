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

// Small builders shared by the unit and acceptance tests.

#pragma once

#include <string>
#include <vector>

#include "hybridsched/domain.hpp"
#include "hybridsched/simulator.hpp"

namespace fixtures {

using namespace hybridsched;

inline JobSpec rigid(std::int64_t nodes, std::vector<ResourceKind> kinds,
                     std::int64_t work, TimeMs walltime, std::int64_t priority = 0) {
  JobSpec s;
  s.name = "j";
  s.user_id = "alice";
  s.kind_preferences = std::move(kinds);
  s.shape = RigidShape{nodes};
  s.work_units = work;
  s.walltime_limit_ms = walltime;
  s.priority = priority;
  return s;
}

inline JobSpec elastic(std::int64_t lo, std::int64_t hi, std::int64_t work, TimeMs walltime) {
  JobSpec s;
  s.name = "e";
  s.user_id = "alice";
  s.kind_preferences = {ResourceKind::Cloud};
  s.shape = ElasticShape{lo, hi};
  s.work_units = work;
  s.walltime_limit_ms = walltime;
  return s;
}

inline ClusterSpec cluster(std::string id, ResourceKind kind, std::int64_t nodes,
                           std::int64_t speed) {
  return ClusterSpec{std::move(id), kind, nodes, 1, speed};
}

inline std::map<JobId, JobSpec> specs_of(const SubmissionTrace& trace) {
  std::map<JobId, JobSpec> out;
  JobId id = 1;
  for (const auto& j : trace.jobs) out[id++] = j.spec;
  return out;
}

}  // namespace fixtures
