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

// Seeded synthetic workloads.
//
// Only std::mt19937_64 output is consumed, through a local bounded draw, so a
// seed produces the same trace on every platform and standard library.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hybridsched/domain.hpp"
#include "hybridsched/simulator.hpp"

namespace hybridsched {

/// Uniform integers from a 64-bit Mersenne Twister, without relying on
/// implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [lo, hi]. Requires lo <= hi.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi);
  /// True with probability permille / 1000.
  bool chance(int permille) { return uniform(0, 999) < permille; }

 private:
  std::mt19937_64 engine_;
};

struct TraceGenOptions {
  std::int64_t jobs = 100;
  TimeMs max_gap_ms = 2000;   // arrival gaps are uniform in [0, max_gap_ms]
  int elastic_permille = 0;   // needs a cloud cluster
  std::int64_t max_nodes = 4;
  std::int64_t min_work = 10;
  std::int64_t max_work = 2000;
  /// Walltime equals the runtime on the slowest acceptable cluster. Otherwise
  /// it is inflated by up to walltime_slack_percent.
  bool exact_walltime = false;
  int walltime_slack_percent = 100;
  /// Share of jobs whose walltime is half their runtime (they time out).
  int short_walltime_permille = 0;
  std::int64_t priority_levels = 1;  // priorities drawn from [0, levels)
  std::int64_t faults = 0;
  TimeMs max_down_ms = 5000;
  bool rigid_may_use_cloud = false;
};

/// Every generated job is satisfiable on `clusters`.
SubmissionTrace generate_trace(const std::vector<ClusterSpec>& clusters,
                               const TraceGenOptions& options, std::uint64_t seed);

}  // namespace hybridsched
