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

#include "hybridsched/service.hpp"

#include <algorithm>
#include <charconv>

namespace hybridsched {

using json = nlohmann::json;

ApiError wire_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyPreferences:
    case ErrorCode::DuplicatePreference:
    case ErrorCode::UnknownKind:
    case ErrorCode::BadShape:
    case ErrorCode::NonPositive:
    case ErrorCode::Overflow:
    case ErrorCode::InvalidInput:
      return {"validation_failed", 422};
    case ErrorCode::ParseError: return {"bad_request", 400};
    case ErrorCode::Unsatisfiable: return {"unsatisfiable", 422};
    case ErrorCode::UnroutableKind: return {"unroutable_kind", 422};
    case ErrorCode::MissingDataset: return {"missing_dataset", 422};
    case ErrorCode::PastTime: return {"past_time", 422};
    case ErrorCode::EmptyWindow: return {"empty_window", 422};
    case ErrorCode::Unauthenticated: return {"unauthenticated", 401};
    case ErrorCode::ConcurrencyQuota:
    case ErrorCode::NodeQuota:
    case ErrorCode::QuotaExceeded:
      return {"quota_rejected", 403};
    case ErrorCode::UnknownJob: return {"unknown_job", 404};
    case ErrorCode::UnknownUser: return {"unknown_user", 404};
    case ErrorCode::UnknownVCluster: return {"unknown_vcluster", 404};
    case ErrorCode::UnknownNode: return {"unknown_node", 404};
    case ErrorCode::InvalidTransition: return {"invalid_transition", 409};
    case ErrorCode::DuplicateJob: return {"duplicate_job", 409};
    case ErrorCode::NoAllocation: return {"no_allocation", 409};
    case ErrorCode::AlreadyTerminal: return {"already_terminal", 409};
    case ErrorCode::NotElastic: return {"not_elastic", 409};
    case ErrorCode::NotRunning: return {"not_running", 409};
    case ErrorCode::DuplicateUser: return {"duplicate_user", 409};
    case ErrorCode::InsufficientCloudCapacity: return {"insufficient_capacity", 409};
    case ErrorCode::AlreadyReleased: return {"already_released", 409};
    case ErrorCode::DuplicateDataset: return {"duplicate_dataset", 409};
    case ErrorCode::NotFinished: return {"not_finished", 409};
    case ErrorCode::NonTerminating: return {"simulation_stalled", 500};
  }
  return {"internal", 500};
}

ApiResponse error_response(ErrorCode code, const std::string& message) {
  auto wire = wire_error(code);
  return {wire.http_status,
          {{"error",
            {{"code", wire.code},
             {"reason", std::string(to_string(code))},
             {"message", message}}}}};
}

ApiResponse error_response(const Error& error) {
  return error_response(error.code(), error.what());
}

namespace {

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("body is not JSON: ") + e.what());
  }
}

void only_fields(const json& j, std::initializer_list<const char*> allowed,
                 const char* what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; })) {
      throw Error(ErrorCode::ParseError,
                  std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + "." + key + ": " + e.what());
  }
}

Quota parse_quota(const json& j, Quota base) {
  only_fields(j, {"max_concurrent_jobs", "max_nodes_in_use", "max_vcluster_nodes"},
              "quota");
  if (j.contains("max_concurrent_jobs")) {
    base.max_concurrent_jobs = get<std::int64_t>(j, "max_concurrent_jobs", "quota");
  }
  if (j.contains("max_nodes_in_use")) {
    base.max_nodes_in_use = get<std::int64_t>(j, "max_nodes_in_use", "quota");
  }
  if (j.contains("max_vcluster_nodes")) {
    base.max_vcluster_nodes = get<std::int64_t>(j, "max_vcluster_nodes", "quota");
  }
  return base;
}

Error unauthenticated() {
  return Error(ErrorCode::Unauthenticated, "missing user id header");
}

std::int64_t exit_status(JobState state) {
  switch (state) {
    case JobState::Completed: return 0;
    case JobState::Failed: return 1;
    case JobState::TimedOut: return 124;
    case JobState::Cancelled: return 130;
    default: return -1;
  }
}

json optional_time(const std::optional<TimeMs>& t) {
  return t ? json(*t) : json(nullptr);
}

}  // namespace

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)),
      catalog_(config_.catalog_path
                   ? std::make_unique<DatasetCatalog>(*config_.catalog_path)
                   : std::make_unique<DatasetCatalog>()),
      sim_(config_.clusters, config_.sim, catalog_.get()),
      cloud_(config_.provision_delay_ms) {
  for (const auto& [cluster, bw] : config_.bandwidth) catalog_->set_bandwidth(cluster, bw);
  for (const auto& u : config_.users) {
    cloud_.create_user(u.user_id, u.quota, u.display_name, 0);
  }
}

JobId Platform::parse_job_id(const std::string& id) const {
  JobId out = 0;
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), out);
  if (ec != std::errc() || ptr != id.data() + id.size()) {
    throw Error(ErrorCode::UnknownJob, "'" + id + "'");
  }
  return out;
}

UserUsage Platform::usage_of(const std::string& user_id) const {
  UserUsage usage;
  for (const auto& [id, rec] : sim_.jobs()) {
    if (rec.spec.user_id != user_id || is_terminal(rec.state)) continue;
    ++usage.concurrent_jobs;
    usage.nodes_in_use += peak_nodes(rec.spec.shape);
  }
  return usage;
}

ApiResponse Platform::submit_job(const std::optional<std::string>& user,
                                 const std::string& body) {
  try {
    if (!user || user->empty()) throw unauthenticated();
    auto spec = parse_job_spec(parse_body(body));
    if (spec.user_id != *user) {
      throw Error(ErrorCode::InvalidInput, "user_id '" + spec.user_id +
                                               "' does not match the authenticated user '" +
                                               *user + "'");
    }
    std::set<ResourceKind> kinds;
    for (const auto& c : config_.clusters) kinds.insert(c.kind);
    validate_job(spec, kinds);
    cloud_.user(spec.user_id);
    catalog_->resolve(spec.dataset_refs);
    auto verdict = cloud_.admit(spec, usage_of(spec.user_id));
    if (!verdict.accepted) throw Error(*verdict.reason, verdict.detail);
    route(spec, config_.sim.scheduler.hybrid_rigid_on_cloud);
    JobId id = sim_.submit(spec);
    const auto& rec = sim_.job(id);
    return {201, {{"job_id", id}, {"state", to_string(rec.state)}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::job_status(const std::string& id) {
  try {
    return {200, to_json(sim_.job(parse_job_id(id)))};
  } catch (const Error& e) {
    return error_response(e);
  }
}

json Platform::result_manifest(const JobRecord& rec) {
  json duration = nullptr;
  if (rec.start_ms && rec.end_ms) duration = *rec.end_ms - *rec.start_ms;
  return {{"job_id", rec.job_id},
          {"terminal", to_string(rec.state)},
          {"exit_status", exit_status(rec.state)},
          {"submit_ms", optional_time(rec.submit_ms)},
          {"start_ms", optional_time(rec.start_ms)},
          {"end_ms", optional_time(rec.end_ms)},
          {"duration_ms", duration},
          {"cluster_id", rec.last_cluster_id.empty() ? json(nullptr)
                                                     : json(rec.last_cluster_id)},
          {"nodes", rec.last_nodes},
          {"credited_work_milli", rec.credited_work_milli},
          {"retries_used", rec.retries_used}};
}

ApiResponse Platform::job_result(const std::string& id) {
  try {
    const auto& rec = sim_.job(parse_job_id(id));
    if (!is_terminal(rec.state)) {
      throw Error(ErrorCode::NotFinished,
                  "job " + id + " is " + std::string(to_string(rec.state)));
    }
    return {200, result_manifest(rec)};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::cancel_job(const std::string& id) {
  try {
    JobId job = parse_job_id(id);
    auto state = sim_.cancel(job);
    return {202, {{"job_id", job}, {"state", to_string(state)}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::list_clusters() {
  json out = json::array();
  for (const auto& c : sim_.scheduler().clusters()) {
    auto entry = to_json(c.spec);
    entry["free"] = c.free_count();
    entry["busy"] = c.busy_count();
    entry["down"] = c.down_count();
    entry["vcluster"] = c.vcluster_count();
    out.push_back(std::move(entry));
  }
  return {200, {{"now_ms", sim_.now()}, {"clusters", out}}};
}

std::vector<VClusterInterval> Platform::vcluster_intervals() const {
  std::vector<VClusterInterval> out;
  for (const auto& [id, vc] : cloud_.vclusters()) {
    out.push_back({vc.cluster_id, vc.node_indices, vc.created_at_ms, vc.released_at_ms});
  }
  return out;
}

ApiResponse Platform::metrics(const std::optional<std::string>& window_ms) {
  try {
    TimeMs to = sim_.now();
    TimeMs from = 0;
    if (window_ms) {
      TimeMs w = 0;
      auto [ptr, ec] = std::from_chars(window_ms->data(),
                                       window_ms->data() + window_ms->size(), w);
      if (ec != std::errc() || ptr != window_ms->data() + window_ms->size() || w < 1) {
        throw Error(ErrorCode::ParseError,
                    "window_ms must be a positive integer, got '" + *window_ms + "'");
      }
      from = std::max<TimeMs>(0, to - w);
    }
    UtilizationReport report;
    if (from < to) {
      report = utilization(sim_.log(), config_.clusters, from, to, vcluster_intervals());
    } else {
      report.from_ms = from;
      report.to_ms = to;
      for (const auto& c : sim_.scheduler().clusters()) {
        report.clusters.push_back({c.spec.cluster_id});
      }
      report.aggregate.cluster_id = "*";
    }
    return {200,
            {{"now_ms", to},
             {"utilization", to_json(report)},
             {"waits", to_json(wait_stats(sim_.log()))}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::create_user(const std::string& body) {
  try {
    auto j = parse_body(body);
    only_fields(j, {"user_id", "display_name", "quota"}, "user");
    auto user_id = get<std::string>(j, "user_id", "user");
    if (user_id.empty()) throw Error(ErrorCode::InvalidInput, "user_id is empty");
    std::string display = j.contains("display_name")
                              ? get<std::string>(j, "display_name", "user")
                              : user_id;
    Quota quota = config_.default_quota;
    if (j.contains("quota")) quota = parse_quota(j.at("quota"), quota);
    if (quota.max_concurrent_jobs < 0 || quota.max_nodes_in_use < 0 ||
        quota.max_vcluster_nodes < 0) {
      throw Error(ErrorCode::InvalidInput, "quota fields must be >= 0");
    }
    const auto& acct = cloud_.create_user(user_id, quota, display, sim_.now());
    return {201, to_json(acct)};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::create_vcluster(const std::optional<std::string>& user,
                                      const std::string& body) {
  try {
    if (!user || user->empty()) throw unauthenticated();
    auto j = parse_body(body);
    only_fields(j, {"node_count", "image"}, "vcluster");
    auto count = get<std::int64_t>(j, "node_count", "vcluster");
    std::string image = j.contains("image") ? get<std::string>(j, "image", "vcluster")
                                            : std::string("default");
    const auto& vc = cloud_.provision_vcluster(sim_.scheduler(), *user, count, image,
                                               sim_.now());
    auto out = to_json(vc);
    sim_.replan();
    return {201, out};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Platform::release_vcluster(const std::string& id) {
  try {
    cloud_.release_vcluster(sim_.scheduler(), id, sim_.now());
    sim_.replan();
    return {200, to_json(cloud_.vcluster(id))};
  } catch (const Error& e) {
    return error_response(e);
  }
}

void Platform::advance_to(TimeMs t_ms) {
  sim_.step(t_ms);
  cloud_.refresh(sim_.now());
}

}  // namespace hybridsched
