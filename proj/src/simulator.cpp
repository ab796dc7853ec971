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

#include "hybridsched/simulator.hpp"

#include <algorithm>

#include "hybridsched/cloud.hpp"

namespace hybridsched {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, what);
  return out;
}

}  // namespace

Simulator::Simulator(std::vector<ClusterSpec> clusters, SimConfig config,
                     const DatasetCatalog* catalog)
    : specs_(clusters),
      config_(config),
      catalog_(catalog),
      scheduler_(std::move(clusters), config.scheduler) {
  if (config_.retry_budget < 0) {
    throw Error(ErrorCode::InvalidInput, "retry_budget must be >= 0");
  }
}

void Simulator::push(Pending p) {
  p.order = next_order_++;
  pending_.push(std::move(p));
}

SimEvent& Simulator::emit(EventKind kind, std::optional<JobId> job) {
  SimEvent e;
  e.t_ms = now_;
  e.seq = static_cast<std::int64_t>(log_.size());
  e.kind = kind;
  e.job_id = job;
  log_.push_back(std::move(e));
  return log_.back();
}

void Simulator::check_submittable(const JobSpec& spec) const {
  std::set<ResourceKind> kinds;
  for (const auto& c : specs_) kinds.insert(c.kind);
  validate_job(spec, kinds);
  route(spec, config_.scheduler.hybrid_rigid_on_cloud);
  if (!scheduler_.satisfiable(spec)) {
    throw Error(ErrorCode::Unsatisfiable,
                "'" + spec.name + "' needs " +
                    std::to_string(start_nodes(spec.shape)) +
                    " nodes, more than any acceptable cluster owns");
  }
  if (catalog_ != nullptr) catalog_->resolve(spec.dataset_refs);
}

void Simulator::load(const SubmissionTrace& trace) {
  std::vector<std::size_t> order(trace.jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trace.jobs[a].t_ms < trace.jobs[b].t_ms;
  });
  for (std::size_t i : order) {
    const auto& tj = trace.jobs[i];
    try {
      if (tj.t_ms < now_) throw Error(ErrorCode::PastTime, std::to_string(tj.t_ms));
      check_submittable(tj.spec);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidInput,
                  "trace job " + std::to_string(i) + " ('" + tj.spec.name +
                      "'): " + e.what());
    }
  }
  for (const auto& f : trace.faults) {
    try {
      if (f.down_ms < 1) throw Error(ErrorCode::NonPositive, "down_ms");
      if (!scheduler_.has_node(f.cluster_id, f.node_index)) {
        throw Error(ErrorCode::UnknownNode,
                    f.cluster_id + "/" + std::to_string(f.node_index));
      }
      if (f.t_ms < now_) throw Error(ErrorCode::PastTime, std::to_string(f.t_ms));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidInput, std::string("fault: ") + e.what());
    }
  }
  for (std::size_t i : order) {
    JobId id = next_job_id_++;
    unsubmitted_.emplace(id, trace.jobs[i].spec);
    Pending p;
    p.t_ms = trace.jobs[i].t_ms;
    p.kind = PendingKind::Submit;
    p.job_id = id;
    push(std::move(p));
  }
  for (const auto& f : trace.faults) {
    inject_node_failure(f.cluster_id, f.node_index, f.t_ms, f.down_ms);
  }
}

JobId Simulator::submit(const JobSpec& spec) {
  check_submittable(spec);
  JobId id = next_job_id_++;
  unsubmitted_.emplace(id, spec);
  on_submit(id);
  plan_cycle();
  return id;
}

void Simulator::inject_node_failure(const std::string& cluster_id,
                                    int node_index, TimeMs at_ms,
                                    TimeMs down_ms) {
  if (!scheduler_.has_node(cluster_id, node_index)) {
    throw Error(ErrorCode::UnknownNode,
                cluster_id + "/" + std::to_string(node_index));
  }
  if (at_ms < now_) {
    throw Error(ErrorCode::PastTime,
                std::to_string(at_ms) + " < " + std::to_string(now_));
  }
  if (down_ms < 1) throw Error(ErrorCode::NonPositive, "down_ms");
  Pending down;
  down.t_ms = at_ms;
  down.kind = PendingKind::NodeDown;
  down.cluster_id = cluster_id;
  down.node_index = node_index;
  down.down_ms = down_ms;
  push(down);
  Pending up = down;
  up.t_ms = at_ms + down_ms;
  up.kind = PendingKind::NodeUp;
  push(std::move(up));
}

const JobRecord& Simulator::job(JobId job_id) const {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, std::to_string(job_id));
  return it->second;
}

bool Simulator::idle() const { return live_jobs_ == 0 && unsubmitted_.empty(); }

std::vector<SimEvent> Simulator::step(TimeMs until_ms) {
  auto first = log_.size();
  while (!pending_.empty() && pending_.top().t_ms <= until_ms) {
    Pending p = pending_.top();
    if (p.t_ms > config_.horizon_ms && !idle()) {
      throw Error(ErrorCode::NonTerminating,
                  "virtual time " + std::to_string(p.t_ms) +
                      " passed the horizon with " + std::to_string(live_jobs_) +
                      " live jobs");
    }
    pending_.pop();
    now_ = std::max(now_, p.t_ms);
    process(p);
  }
  now_ = std::max(now_, until_ms);
  return {log_.begin() + static_cast<std::ptrdiff_t>(first), log_.end()};
}

void Simulator::run() {
  while (!pending_.empty()) {
    Pending p = pending_.top();
    if (p.t_ms > config_.horizon_ms && !idle()) {
      throw Error(ErrorCode::NonTerminating,
                  "virtual time " + std::to_string(p.t_ms) +
                      " passed the horizon with " + std::to_string(live_jobs_) +
                      " live jobs");
    }
    pending_.pop();
    now_ = std::max(now_, p.t_ms);
    process(p);
  }
  if (!idle()) {
    throw Error(ErrorCode::NonTerminating,
                std::to_string(live_jobs_) +
                    " jobs can never progress: no pending events remain");
  }
}

void Simulator::process(const Pending& p) {
  switch (p.kind) {
    case PendingKind::Submit:
      on_submit(p.job_id);
      break;
    case PendingKind::JobEnd: {
      auto it = runs_.find(p.job_id);
      if (it == runs_.end() || it->second.generation != p.generation) return;
      on_job_end(p.job_id);
      break;
    }
    case PendingKind::NodeDown:
      on_node_down(p.cluster_id, p.node_index, p.down_ms);
      break;
    case PendingKind::NodeUp:
      scheduler_.mark_up(p.cluster_id, p.node_index);
      {
        auto& e = emit(EventKind::NodeUp);
        e.cluster_id = p.cluster_id;
        e.node_index = p.node_index;
      }
      break;
  }
  plan_cycle();
}

void Simulator::on_submit(JobId job_id) {
  auto node = unsubmitted_.extract(job_id);
  JobRecord rec;
  rec.job_id = job_id;
  rec.spec = std::move(node.mapped());
  rec.layer = route(rec.spec, config_.scheduler.hybrid_rigid_on_cloud);
  rec.submit_ms = now_;
  rec.state = JobState::Submitted;
  emit(EventKind::JobSubmitted, job_id);
  rec.state = transition(rec.state, LifecycleEvent::Validated);
  scheduler_.enqueue(job_id, rec.spec, now_);
  jobs_.emplace(job_id, std::move(rec));
  ++live_jobs_;
  emit(EventKind::JobQueued, job_id);
}

void Simulator::plan_cycle() {
  auto decision = scheduler_.plan(now_);

  // Bring elastic progress up to date before any worker count changes.
  for (auto& [id, rs] : runs_) {
    if (is_elastic(jobs_.at(id).spec.shape)) credit(id);
  }

  scheduler_.apply(decision, now_);
  if (observer_ && decision.reservation) {
    PlanObservation obs;
    obs.now_ms = now_;
    obs.reservation = *decision.reservation;
    const auto& spec = jobs_.at(decision.reservation->job_id).spec;
    obs.acceptable_clusters = scheduler_.acceptable_clusters(spec);
    obs.need = start_nodes(spec.shape);
    observer_(obs);
  }

  for (JobId id : decision.unsatisfiable) {
    // Normally rejected before queueing; settle through the legal
    // Queued -> Cancelled edge if one slips through.
    auto& rec = jobs_.at(id);
    rec.state = transition(rec.state, LifecycleEvent::CancelRequested);
    rec.end_ms = now_;
    --live_jobs_;
    emit(EventKind::JobCancelled, id);
  }
  // Shrinks from reclaimed surplus are logged before the nodes change hands.
  for (const auto& reclaim : decision.reclaims) {
    record_workers(reclaim.job_id);
    schedule_end(reclaim.job_id);
  }
  for (const auto& alloc : decision.starts) start_job(alloc);

  scheduler_.rebalance_elastic(now_);
  // Shrinks are logged before grows so a replay never sees a node twice.
  for (bool growing : {false, true}) {
    for (const auto& [id, _] : runs_) {
      const auto* live = scheduler_.live_allocation(id);
      if (live == nullptr || !live->elastic) continue;
      const auto& logged = jobs_.at(id).allocation;
      if (logged && logged->node_indices == live->allocation.node_indices) continue;
      bool grows = !logged || live->allocation.node_indices.size() >= logged->node_indices.size();
      if (grows != growing) continue;
      record_workers(id);
      schedule_end(id);
    }
  }
}

void Simulator::record_workers(JobId job_id) {
  auto& rs = runs_.at(job_id);
  auto& rec = jobs_.at(job_id);
  const auto& alloc = scheduler_.live_allocation(job_id)->allocation;
  rs.workers = static_cast<std::int64_t>(alloc.node_indices.size());
  rec.allocation = alloc;
  rec.last_nodes = alloc.node_indices;
  rec.worker_history.push_back({now_, rs.workers});
  auto& e = emit(EventKind::RescaleApplied, job_id);
  e.cluster_id = alloc.cluster_id;
  e.nodes = alloc.node_indices;
  e.workers = rs.workers;
}

void Simulator::start_job(const Allocation& alloc) {
  auto& rec = jobs_.at(alloc.job_id);
  rec.state = transition(rec.state, LifecycleEvent::Scheduled);
  rec.state = transition(rec.state, LifecycleEvent::Started);
  rec.allocation = scheduler_.live_allocation(alloc.job_id)->allocation;
  rec.start_ms = now_;
  rec.last_cluster_id = alloc.cluster_id;
  rec.last_nodes = alloc.node_indices;
  rec.credited_work_milli = 0;

  const auto& cluster = scheduler_.cluster(alloc.cluster_id);
  TimeMs staging = 0;
  if (catalog_ != nullptr) {
    for (const auto& ds : catalog_->resolve(rec.spec.dataset_refs)) {
      staging += catalog_->staging_delay_ms(ds, alloc.cluster_id);
    }
  }
  RunState rs;
  rs.compute_start_ms = now_ + staging;
  rs.credited_until_ms = rs.compute_start_ms;
  rs.required_milli = checked_mul(rec.spec.work_units, 1000, "work_units");
  rs.speed = cluster.spec.speed_factor;
  rs.workers = static_cast<std::int64_t>(alloc.node_indices.size());
  rs.deadline_ms = now_ + rec.spec.walltime_limit_ms;
  runs_[alloc.job_id] = rs;

  if (is_elastic(rec.spec.shape)) rec.worker_history.push_back({now_, rs.workers});
  auto& e = emit(EventKind::JobStarted, alloc.job_id);
  e.cluster_id = alloc.cluster_id;
  e.nodes = alloc.node_indices;
  e.workers = rs.workers;
  schedule_end(alloc.job_id);
}

void Simulator::credit(JobId job_id) {
  auto& rs = runs_.at(job_id);
  TimeMs from = std::max(rs.credited_until_ms, rs.compute_start_ms);
  if (now_ > from) {
    auto rate = checked_mul(rs.workers, rs.speed, "credit rate");
    rs.credited_milli += checked_mul(rate, now_ - from, "credited work");
  }
  rs.credited_until_ms = std::max(rs.credited_until_ms, now_);
}

void Simulator::schedule_end(JobId job_id) {
  auto& rs = runs_.at(job_id);
  const auto& spec = jobs_.at(job_id).spec;
  TimeMs finish_at = 0;
  if (!is_elastic(spec.shape)) {
    finish_at = rs.compute_start_ms +
                job_duration_ms(spec.work_units, rs.speed, rs.workers);
  } else {
    auto remaining = rs.required_milli - rs.credited_milli;
    TimeMs t0 = std::max(now_, rs.compute_start_ms);
    finish_at = remaining <= 0
                    ? now_
                    : t0 + ceil_div(remaining, checked_mul(rs.workers, rs.speed,
                                                           "elastic rate"));
  }
  rs.will_time_out = finish_at > rs.deadline_ms;
  rs.generation = next_order_;  // unique across the run
  Pending p;
  p.t_ms = rs.will_time_out ? rs.deadline_ms : finish_at;
  p.kind = PendingKind::JobEnd;
  p.job_id = job_id;
  p.generation = rs.generation;
  push(std::move(p));
}

void Simulator::on_job_end(JobId job_id) {
  credit(job_id);
  if (runs_.at(job_id).will_time_out) {
    finish_job(job_id, LifecycleEvent::WalltimeExceeded, EventKind::JobTimedOut);
  } else {
    finish_job(job_id, LifecycleEvent::Finished, EventKind::JobFinished);
  }
}

void Simulator::finish_job(JobId job_id, LifecycleEvent event, EventKind kind) {
  auto& rec = jobs_.at(job_id);
  rec.state = transition(rec.state, event);
  scheduler_.release(job_id);
  rec.allocation.reset();
  rec.end_ms = now_;
  rec.credited_work_milli = runs_.at(job_id).credited_milli;
  runs_.erase(job_id);
  --live_jobs_;
  emit(kind, job_id);
}

void Simulator::on_node_down(const std::string& cluster_id, int node,
                             TimeMs down_ms) {
  {
    auto& e = emit(EventKind::NodeDown);
    e.cluster_id = cluster_id;
    e.node_index = node;
  }
  auto loss = scheduler_.mark_down(cluster_id, node, now_ + down_ms);
  if (!loss) return;
  JobId id = loss->job_id;
  if (loss->surplus_only) {
    credit(id);
    record_workers(id);
    schedule_end(id);
    return;
  }
  auto& rec = jobs_.at(id);
  scheduler_.release(id);
  rec.allocation.reset();
  runs_.erase(id);
  bool retry = rec.retries_used < config_.retry_budget;
  rec.state = transition(rec.state, LifecycleEvent::NodeLost, retry);
  if (rec.state == JobState::Queued) {
    ++rec.retries_used;
    scheduler_.enqueue(id, rec.spec, now_);
    emit(EventKind::JobQueued, id);
  } else {
    rec.end_ms = now_;
    --live_jobs_;
    emit(EventKind::JobFailed, id);
  }
}

JobState Simulator::cancel(JobId job_id) {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, std::to_string(job_id));
  auto& rec = it->second;
  if (is_terminal(rec.state)) {
    throw Error(ErrorCode::AlreadyTerminal,
                std::to_string(job_id) + " is " + std::string(to_string(rec.state)));
  }
  if (rec.state == JobState::Queued) {
    scheduler_.dequeue(job_id);
  } else if (runs_.contains(job_id)) {
    credit(job_id);
    rec.credited_work_milli = runs_.at(job_id).credited_milli;
    scheduler_.release(job_id);
    runs_.erase(job_id);
  }
  rec.state = transition(rec.state, LifecycleEvent::CancelRequested);
  rec.allocation.reset();
  rec.end_ms = now_;
  --live_jobs_;
  emit(EventKind::JobCancelled, job_id);
  plan_cycle();
  return rec.state;
}

void Simulator::replan() { plan_cycle(); }

RunResult run_trace(const SubmissionTrace& trace,
                    const std::vector<ClusterSpec>& clusters,
                    const SimConfig& config) {
  Simulator sim(clusters, config);
  sim.load(trace);
  sim.run();
  return {sim.log(), sim.jobs()};
}

// ---------------------------------------------------------------------------
// File formats

namespace {

void reject_unknown(const nlohmann::json& j,
                    std::initializer_list<const char*> allowed,
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
T field(const nlohmann::json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string(what) + "." + key + ": " + e.what());
  }
}

}  // namespace

SubmissionTrace parse_trace(const nlohmann::json& j) {
  reject_unknown(j, {"rng_seed", "jobs", "faults"}, "trace");
  SubmissionTrace trace;
  if (j.contains("rng_seed")) {
    trace.rng_seed = field<std::uint64_t>(j, "rng_seed", "trace");
  }
  if (j.contains("jobs")) {
    for (const auto& item : j.at("jobs")) {
      reject_unknown(item, {"t_ms", "spec"}, "trace job");
      TraceJob tj;
      tj.t_ms = field<TimeMs>(item, "t_ms", "trace job");
      if (tj.t_ms < 0) throw Error(ErrorCode::ParseError, "negative t_ms");
      tj.spec = parse_job_spec(item.at("spec"));
      trace.jobs.push_back(std::move(tj));
    }
  }
  if (j.contains("faults")) {
    for (const auto& item : j.at("faults")) {
      reject_unknown(item, {"t_ms", "cluster_id", "node_index", "down_ms"},
                     "fault");
      FaultDirective f;
      f.t_ms = field<TimeMs>(item, "t_ms", "fault");
      f.cluster_id = field<std::string>(item, "cluster_id", "fault");
      f.node_index = field<int>(item, "node_index", "fault");
      f.down_ms = field<TimeMs>(item, "down_ms", "fault");
      if (f.t_ms < 0) throw Error(ErrorCode::ParseError, "negative fault t_ms");
      trace.faults.push_back(std::move(f));
    }
  }
  return trace;
}

nlohmann::json to_json(const SubmissionTrace& trace) {
  nlohmann::json jobs = nlohmann::json::array();
  for (const auto& tj : trace.jobs) {
    jobs.push_back({{"t_ms", tj.t_ms}, {"spec", to_json(tj.spec)}});
  }
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : trace.faults) {
    faults.push_back({{"t_ms", f.t_ms},
                      {"cluster_id", f.cluster_id},
                      {"node_index", f.node_index},
                      {"down_ms", f.down_ms}});
  }
  return {{"rng_seed", trace.rng_seed}, {"jobs", jobs}, {"faults", faults}};
}

ClusterFile parse_cluster_file(const nlohmann::json& j) {
  ClusterFile out;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    reject_unknown(j, {"clusters", "config"}, "cluster file");
    if (!j.contains("clusters")) {
      throw Error(ErrorCode::ParseError, "cluster file: missing 'clusters'");
    }
    list = &j.at("clusters");
    if (j.contains("config")) {
      const auto& c = j.at("config");
      reject_unknown(c,
                     {"backfill", "hybrid_rigid_on_cloud", "partitioned",
                      "retry_budget", "horizon_ms"},
                     "config");
      auto& cfg = out.config;
      if (c.contains("backfill")) cfg.scheduler.backfill = field<bool>(c, "backfill", "config");
      if (c.contains("hybrid_rigid_on_cloud")) {
        cfg.scheduler.hybrid_rigid_on_cloud = field<bool>(c, "hybrid_rigid_on_cloud", "config");
      }
      if (c.contains("partitioned")) {
        cfg.scheduler.partitioned = field<bool>(c, "partitioned", "config");
      }
      if (c.contains("retry_budget")) {
        cfg.retry_budget = field<std::int64_t>(c, "retry_budget", "config");
      }
      if (c.contains("horizon_ms")) cfg.horizon_ms = field<TimeMs>(c, "horizon_ms", "config");
    }
  }
  if (!list->is_array()) throw Error(ErrorCode::ParseError, "clusters must be an array");
  for (const auto& c : *list) out.clusters.push_back(parse_cluster_spec(c));
  validate_clusters(out.clusters);
  return out;
}

}  // namespace hybridsched
