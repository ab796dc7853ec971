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

#include "hybridsched/domain.hpp"

#include <algorithm>
#include <limits>

namespace hybridsched {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyPreferences: return "EmptyPreferences";
    case ErrorCode::DuplicatePreference: return "DuplicatePreference";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateJob: return "DuplicateJob";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::NoAllocation: return "NoAllocation";
    case ErrorCode::AlreadyTerminal: return "AlreadyTerminal";
    case ErrorCode::NotElastic: return "NotElastic";
    case ErrorCode::NotRunning: return "NotRunning";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::NonTerminating: return "NonTerminating";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::PastTime: return "PastTime";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DuplicateUser: return "DuplicateUser";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::ConcurrencyQuota: return "ConcurrencyQuota";
    case ErrorCode::NodeQuota: return "NodeQuota";
    case ErrorCode::UnroutableKind: return "UnroutableKind";
    case ErrorCode::InsufficientCloudCapacity: return "InsufficientCloudCapacity";
    case ErrorCode::QuotaExceeded: return "QuotaExceeded";
    case ErrorCode::UnknownVCluster: return "UnknownVCluster";
    case ErrorCode::AlreadyReleased: return "AlreadyReleased";
    case ErrorCode::DuplicateDataset: return "DuplicateDataset";
    case ErrorCode::MissingDataset: return "MissingDataset";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NotFinished: return "NotFinished";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
  }
  return "Unknown";
}

std::string_view to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::Cpu: return "cpu";
    case ResourceKind::Gpu: return "gpu";
    case ResourceKind::Knl: return "knl";
    case ResourceKind::Cloud: return "cloud";
  }
  return "?";
}

ResourceKind parse_kind(std::string_view text) {
  for (auto kind : kAllKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw Error(ErrorCode::ParseError,
              "unknown resource kind '" + std::string(text) + "'");
}

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Submitted: return "Submitted";
    case JobState::Queued: return "Queued";
    case JobState::Dispatched: return "Dispatched";
    case JobState::Running: return "Running";
    case JobState::Completed: return "Completed";
    case JobState::Failed: return "Failed";
    case JobState::Cancelled: return "Cancelled";
    case JobState::TimedOut: return "TimedOut";
  }
  return "?";
}

std::string_view to_string(LifecycleEvent event) {
  switch (event) {
    case LifecycleEvent::Validated: return "Validated";
    case LifecycleEvent::Scheduled: return "Scheduled";
    case LifecycleEvent::Started: return "Started";
    case LifecycleEvent::Finished: return "Finished";
    case LifecycleEvent::Errored: return "Errored";
    case LifecycleEvent::CancelRequested: return "CancelRequested";
    case LifecycleEvent::WalltimeExceeded: return "WalltimeExceeded";
    case LifecycleEvent::NodeLost: return "NodeLost";
  }
  return "?";
}

std::string_view to_string(Layer layer) {
  return layer == Layer::Hpc ? "hpc" : "cloud";
}

bool is_terminal(JobState state) {
  return state == JobState::Completed || state == JobState::Failed ||
         state == JobState::Cancelled || state == JobState::TimedOut;
}

JobState transition(JobState state, LifecycleEvent event,
                    bool retry_available) {
  using S = JobState;
  using E = LifecycleEvent;
  if (!is_terminal(state) && event == E::CancelRequested) return S::Cancelled;
  switch (state) {
    case S::Submitted:
      if (event == E::Validated) return S::Queued;
      break;
    case S::Queued:
      if (event == E::Scheduled) return S::Dispatched;
      break;
    case S::Dispatched:
      if (event == E::Started) return S::Running;
      break;
    case S::Running:
      switch (event) {
        case E::Finished: return S::Completed;
        case E::Errored: return S::Failed;
        case E::WalltimeExceeded: return S::TimedOut;
        case E::NodeLost: return retry_available ? S::Queued : S::Failed;
        default: break;
      }
      break;
    default:
      break;
  }
  throw Error(ErrorCode::InvalidTransition, std::string(to_string(state)) +
                                                " --" +
                                                std::string(to_string(event)) +
                                                "-->");
}

std::int64_t start_nodes(const JobShape& shape) {
  if (const auto* rigid = std::get_if<RigidShape>(&shape)) {
    return rigid->node_count;
  }
  return std::get<ElasticShape>(shape).min_workers;
}

std::int64_t peak_nodes(const JobShape& shape) {
  if (const auto* rigid = std::get_if<RigidShape>(&shape)) {
    return rigid->node_count;
  }
  return std::get<ElasticShape>(shape).max_workers;
}

void validate_clusters(const std::vector<ClusterSpec>& clusters) {
  std::set<std::string> ids;
  for (const auto& c : clusters) {
    if (c.cluster_id.empty()) {
      throw Error(ErrorCode::InvalidInput, "empty cluster_id");
    }
    if (!ids.insert(c.cluster_id).second) {
      throw Error(ErrorCode::InvalidInput,
                  "duplicate cluster_id '" + c.cluster_id + "'");
    }
    if (c.node_count < 1) throw Error(ErrorCode::NonPositive, "node_count");
    if (c.cores_per_node < 1) {
      throw Error(ErrorCode::NonPositive, "cores_per_node");
    }
    if (c.speed_factor < 1) throw Error(ErrorCode::NonPositive, "speed_factor");
    if (c.node_count > std::numeric_limits<int>::max()) {
      throw Error(ErrorCode::Overflow, "node_count");
    }
  }
}

JobSpec validate_job(const JobSpec& spec,
                     const std::set<ResourceKind>& known_kinds) {
  if (spec.kind_preferences.empty()) throw Error(ErrorCode::EmptyPreferences);
  std::set<ResourceKind> seen;
  for (auto kind : spec.kind_preferences) {
    if (!seen.insert(kind).second) {
      throw Error(ErrorCode::DuplicatePreference, std::string(to_string(kind)));
    }
  }
  for (auto kind : spec.kind_preferences) {
    if (!known_kinds.contains(kind)) {
      throw Error(ErrorCode::UnknownKind, std::string(to_string(kind)));
    }
  }
  if (spec.work_units < 1) throw Error(ErrorCode::NonPositive, "work_units");
  if (spec.walltime_limit_ms < 1) {
    throw Error(ErrorCode::NonPositive, "walltime_limit_ms");
  }
  if (const auto* rigid = std::get_if<RigidShape>(&spec.shape)) {
    if (rigid->node_count < 1) {
      throw Error(ErrorCode::NonPositive, "node_count");
    }
  } else {
    const auto& elastic = std::get<ElasticShape>(spec.shape);
    if (elastic.min_workers < 1) {
      throw Error(ErrorCode::NonPositive, "min_workers");
    }
    if (elastic.min_workers > elastic.max_workers) {
      throw Error(ErrorCode::BadShape, "min_workers > max_workers");
    }
    if (!seen.contains(ResourceKind::Cloud)) {
      throw Error(ErrorCode::BadShape,
                  "elastic jobs run on cloud only; add cloud to preferences");
    }
  }
  return spec;
}

TimeMs job_duration_ms(std::int64_t work_units, std::int64_t speed_factor,
                       std::int64_t nodes) {
  if (work_units < 1) throw Error(ErrorCode::NonPositive, "work_units");
  if (speed_factor < 1) throw Error(ErrorCode::NonPositive, "speed_factor");
  if (nodes < 1) throw Error(ErrorCode::NonPositive, "nodes");
  std::int64_t milli = 0;
  std::int64_t rate = 0;
  if (__builtin_mul_overflow(work_units, std::int64_t{1000}, &milli) ||
      __builtin_mul_overflow(speed_factor, nodes, &rate)) {
    throw Error(ErrorCode::Overflow, "duration");
  }
  return std::max<TimeMs>(1, ceil_div(milli, rate));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

void require_fields(const json& j, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional,
                    const char* what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    auto match = [&](const char* k) { return key == k; };
    if (std::none_of(required.begin(), required.end(), match) &&
        std::none_of(optional.begin(), optional.end(), match)) {
      throw Error(ErrorCode::ParseError,
                  std::string(what) + ": unknown field '" + key + "'");
    }
  }
  for (const char* key : required) {
    if (!j.contains(key)) {
      throw Error(ErrorCode::ParseError,
                  std::string(what) + ": missing field '" + key + "'");
    }
  }
}

std::int64_t get_int(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::ParseError,
                std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string get_string(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) {
    throw Error(ErrorCode::ParseError,
                std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

json shape_to_json(const JobShape& shape) {
  if (const auto* rigid = std::get_if<RigidShape>(&shape)) {
    return {{"rigid", {{"node_count", rigid->node_count}}}};
  }
  const auto& e = std::get<ElasticShape>(shape);
  return {{"elastic",
           {{"min_workers", e.min_workers}, {"max_workers", e.max_workers}}}};
}

JobShape parse_shape(const json& j) {
  if (!j.is_object() || j.size() != 1) {
    throw Error(ErrorCode::ParseError,
                "shape must be {\"rigid\":{...}} or {\"elastic\":{...}}");
  }
  if (j.contains("rigid")) {
    const auto& r = j["rigid"];
    require_fields(r, {"node_count"}, {}, "rigid");
    return RigidShape{get_int(r, "node_count")};
  }
  if (j.contains("elastic")) {
    const auto& e = j["elastic"];
    require_fields(e, {"min_workers", "max_workers"}, {}, "elastic");
    return ElasticShape{get_int(e, "min_workers"), get_int(e, "max_workers")};
  }
  throw Error(ErrorCode::ParseError, "unknown shape '" + j.begin().key() + "'");
}

json allocation_to_json(const Allocation& a) {
  return {{"cluster_id", a.cluster_id},
          {"node_indices", a.node_indices},
          {"start_ms", a.start_ms}};
}

json optional_time(const std::optional<TimeMs>& t) {
  return t ? json(*t) : json(nullptr);
}

}  // namespace

nlohmann::json to_json(const JobSpec& spec) {
  json kinds = json::array();
  for (auto k : spec.kind_preferences) kinds.push_back(to_string(k));
  return {{"name", spec.name},
          {"user_id", spec.user_id},
          {"kind_preferences", kinds},
          {"shape", shape_to_json(spec.shape)},
          {"work_units", spec.work_units},
          {"walltime_limit_ms", spec.walltime_limit_ms},
          {"dataset_refs", spec.dataset_refs},
          {"priority", spec.priority}};
}

JobSpec parse_job_spec(const nlohmann::json& j) {
  require_fields(j,
                 {"name", "user_id", "kind_preferences", "shape", "work_units",
                  "walltime_limit_ms"},
                 {"dataset_refs", "priority"}, "job spec");
  JobSpec spec;
  spec.name = get_string(j, "name");
  spec.user_id = get_string(j, "user_id");
  const auto& kinds = j.at("kind_preferences");
  if (!kinds.is_array()) {
    throw Error(ErrorCode::ParseError, "kind_preferences must be an array");
  }
  for (const auto& k : kinds) {
    if (!k.is_string()) {
      throw Error(ErrorCode::ParseError, "kind_preferences entries are strings");
    }
    spec.kind_preferences.push_back(parse_kind(k.get<std::string>()));
  }
  spec.shape = parse_shape(j.at("shape"));
  spec.work_units = get_int(j, "work_units");
  spec.walltime_limit_ms = get_int(j, "walltime_limit_ms");
  if (j.contains("dataset_refs")) {
    const auto& refs = j["dataset_refs"];
    if (!refs.is_array()) {
      throw Error(ErrorCode::ParseError, "dataset_refs must be an array");
    }
    for (const auto& r : refs) {
      if (!r.is_string()) {
        throw Error(ErrorCode::ParseError, "dataset_refs entries are strings");
      }
      spec.dataset_refs.push_back(r.get<std::string>());
    }
  }
  if (j.contains("priority")) spec.priority = get_int(j, "priority");
  return spec;
}

nlohmann::json to_json(const ClusterSpec& spec) {
  return {{"cluster_id", spec.cluster_id},
          {"kind", to_string(spec.kind)},
          {"node_count", spec.node_count},
          {"cores_per_node", spec.cores_per_node},
          {"speed_factor", spec.speed_factor}};
}

ClusterSpec parse_cluster_spec(const nlohmann::json& j) {
  require_fields(j, {"cluster_id", "kind", "node_count"},
                 {"cores_per_node", "speed_factor"}, "cluster spec");
  ClusterSpec spec;
  spec.cluster_id = get_string(j, "cluster_id");
  spec.kind = parse_kind(get_string(j, "kind"));
  spec.node_count = get_int(j, "node_count");
  if (j.contains("cores_per_node")) {
    spec.cores_per_node = get_int(j, "cores_per_node");
  }
  if (j.contains("speed_factor")) spec.speed_factor = get_int(j, "speed_factor");
  return spec;
}

nlohmann::json to_json(const JobRecord& record) {
  json history = json::array();
  for (const auto& s : record.worker_history) {
    history.push_back({s.time_ms, s.workers});
  }
  return {{"job_id", record.job_id},
          {"name", record.spec.name},
          {"user_id", record.spec.user_id},
          {"state", to_string(record.state)},
          {"layer", to_string(record.layer)},
          {"submit_ms", optional_time(record.submit_ms)},
          {"start_ms", optional_time(record.start_ms)},
          {"end_ms", optional_time(record.end_ms)},
          {"allocation", record.allocation
                             ? allocation_to_json(*record.allocation)
                             : json(nullptr)},
          {"worker_history", history},
          {"retries_used", record.retries_used},
          {"spec", to_json(record.spec)}};
}

}  // namespace hybridsched
