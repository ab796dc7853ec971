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

// Simulation events and their canonical JSON Lines form.
//
// One object per line, keys in the order t, seq, kind, then the present
// payload fields alphabetically (cluster_id, job_id, node_index, nodes,
// workers). No whitespace, integers only. Two runs are equal iff their
// canonical logs are byte-identical.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsched/domain.hpp"

namespace hybridsched {

enum class EventKind {
  JobSubmitted,
  JobQueued,
  JobStarted,
  JobFinished,
  JobFailed,
  JobTimedOut,
  JobCancelled,
  NodeDown,
  NodeUp,
  RescaleApplied,
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);
/// JobFinished, JobFailed, JobTimedOut, JobCancelled.
bool is_terminal_event(EventKind kind);

struct SimEvent {
  TimeMs t_ms = 0;
  std::int64_t seq = 0;
  EventKind kind = EventKind::JobSubmitted;
  std::optional<JobId> job_id;
  std::optional<std::string> cluster_id;
  std::optional<int> node_index;
  /// Full node set held after the event (JobStarted, RescaleApplied).
  std::optional<std::vector<int>> nodes;
  std::optional<std::int64_t> workers;

  bool operator==(const SimEvent&) const = default;
};

using EventLog = std::vector<SimEvent>;

std::string to_canonical_line(const SimEvent& event);
/// Throws ParseError.
SimEvent parse_canonical_line(std::string_view line);

std::string to_canonical_jsonl(const EventLog& log);
void write_canonical_jsonl(std::ostream& out, const EventLog& log);
EventLog read_canonical_jsonl(std::istream& in);

}  // namespace hybridsched
