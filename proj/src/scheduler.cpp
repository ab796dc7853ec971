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

#include "hybridsched/scheduler.hpp"

#include <algorithm>
#include <numeric>

namespace hybridsched {

std::int64_t ClusterState::free_count() const {
  return std::count_if(nodes.begin(), nodes.end(),
                       [](const NodeState& n) { return n.usable(); });
}

std::int64_t ClusterState::busy_count() const {
  return std::count_if(nodes.begin(), nodes.end(),
                       [](const NodeState& n) { return n.holder != 0; });
}

std::int64_t ClusterState::down_count() const {
  return std::count_if(nodes.begin(), nodes.end(),
                       [](const NodeState& n) { return n.down_count > 0; });
}

std::int64_t ClusterState::vcluster_count() const {
  return std::count_if(nodes.begin(), nodes.end(),
                       [](const NodeState& n) { return !n.vcluster.empty(); });
}

Scheduler::Scheduler(std::vector<ClusterSpec> clusters, SchedulerConfig config)
    : config_(config) {
  validate_clusters(clusters);
  std::sort(clusters.begin(), clusters.end(),
            [](const ClusterSpec& a, const ClusterSpec& b) {
              return a.cluster_id < b.cluster_id;
            });
  for (auto& spec : clusters) {
    ClusterState state;
    state.nodes.resize(static_cast<std::size_t>(spec.node_count));
    state.spec = std::move(spec);
    clusters_.push_back(std::move(state));
  }
}

int Scheduler::index_of(const std::string& cluster_id) const {
  auto it = std::lower_bound(
      clusters_.begin(), clusters_.end(), cluster_id,
      [](const ClusterState& c, const std::string& id) {
        return c.spec.cluster_id < id;
      });
  if (it == clusters_.end() || it->spec.cluster_id != cluster_id) return -1;
  return static_cast<int>(it - clusters_.begin());
}

const ClusterState& Scheduler::cluster(const std::string& cluster_id) const {
  int idx = index_of(cluster_id);
  if (idx < 0) throw Error(ErrorCode::UnknownNode, "cluster " + cluster_id);
  return clusters_[static_cast<std::size_t>(idx)];
}

bool Scheduler::has_node(const std::string& cluster_id, int node) const {
  int idx = index_of(cluster_id);
  return idx >= 0 && node >= 0 &&
         node < static_cast<int>(clusters_[static_cast<std::size_t>(idx)].nodes.size());
}

const LiveAllocation* Scheduler::live_allocation(JobId job_id) const {
  auto it = live_.find(job_id);
  return it == live_.end() ? nullptr : &it->second;
}

std::vector<int> Scheduler::acceptable_indices(const JobSpec& spec) const {
  std::vector<int> out;
  auto append_kind = [&](ResourceKind kind) {
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      if (clusters_[i].spec.kind == kind) out.push_back(static_cast<int>(i));
    }
  };
  if (is_elastic(spec.shape)) {
    append_kind(ResourceKind::Cloud);
    return out;
  }
  for (auto kind : spec.kind_preferences) {
    if (kind == ResourceKind::Cloud && !config_.hybrid_rigid_on_cloud) continue;
    append_kind(kind);
    if (config_.partitioned && !out.empty()) break;
  }
  return out;
}

std::vector<std::string> Scheduler::acceptable_clusters(
    const JobSpec& spec) const {
  std::vector<std::string> ids;
  for (int idx : acceptable_indices(spec)) {
    ids.push_back(clusters_[static_cast<std::size_t>(idx)].spec.cluster_id);
  }
  return ids;
}

bool Scheduler::satisfiable(const JobSpec& spec) const {
  auto need = start_nodes(spec.shape);
  for (int idx : acceptable_indices(spec)) {
    if (clusters_[static_cast<std::size_t>(idx)].spec.node_count >= need) {
      return true;
    }
  }
  return false;
}

Scheduler::Scheduler(const Scheduler& other)
    : config_(other.config_),
      clusters_(other.clusters_),
      pending_(other.pending_),
      unfit_queued_(other.unfit_queued_),
      seq_of_(other.seq_of_),
      next_seq_(other.next_seq_),
      live_(other.live_),
      last_reservation_(other.last_reservation_) {
  relink_queue();
}

Scheduler& Scheduler::operator=(const Scheduler& other) {
  if (this != &other) {
    Scheduler copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Scheduler::relink_queue() {
  queue_.clear();
  for (const auto& [_, job] : pending_) queue_.emplace(job.entry, &job);
}

QueueEntry Scheduler::enqueue(JobId job_id, const JobSpec& spec,
                              TimeMs /*now_ms*/) {
  if (pending_.contains(job_id) || live_.contains(job_id)) {
    throw Error(ErrorCode::DuplicateJob, std::to_string(job_id));
  }
  auto [seq_it, fresh] = seq_of_.try_emplace(job_id, next_seq_);
  if (fresh) ++next_seq_;

  PendingJob job;
  job.entry.job_id = job_id;
  job.entry.priority = spec.priority;
  job.entry.submit_seq = seq_it->second;
  job.entry.remaining_kind_preferences = spec.kind_preferences;
  job.need = start_nodes(spec.shape);
  job.walltime_ms = spec.walltime_limit_ms;
  job.elastic = is_elastic(spec.shape);
  if (job.elastic) {
    const auto& e = std::get<ElasticShape>(spec.shape);
    job.min_workers = e.min_workers;
    job.max_workers = e.max_workers;
  }
  job.clusters = acceptable_indices(spec);
  for (int c : job.clusters) {
    if (clusters_[static_cast<std::size_t>(c)].spec.node_count >= job.need) job.fits = true;
  }
  if (!job.fits) ++unfit_queued_;
  auto entry = job.entry;
  auto slot = pending_.emplace(job_id, std::move(job)).first;
  queue_.emplace(entry, &slot->second);
  return entry;
}

bool Scheduler::dequeue(JobId job_id) {
  auto it = pending_.find(job_id);
  if (it == pending_.end()) return false;
  if (!it->second.fits) --unfit_queued_;
  queue_.erase(it->second.entry);
  pending_.erase(it);
  return true;
}

std::vector<QueueEntry> Scheduler::queue() const {
  std::vector<QueueEntry> out;
  out.reserve(queue_.size());
  for (const auto& [entry, _] : queue_) out.push_back(entry);
  return out;
}

namespace {

// Planning view of one cluster: which nodes could be handed out right now
// and when every node is expected to be free.
struct ClusterView {
  std::vector<char> avail;
  std::vector<TimeMs> free_at;
  std::int64_t avail_count = 0;
};

}  // namespace

DispatchDecision Scheduler::plan(TimeMs now_ms) const {
  DispatchDecision decision;
  if (queue_.empty()) return decision;

  std::vector<ClusterView> views(clusters_.size());
  std::int64_t total_avail = 0;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const auto& nodes = clusters_[c].nodes;
    auto& view = views[c];
    view.avail.assign(nodes.size(), 0);
    view.free_at.assign(nodes.size(), now_ms);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (!n.vcluster.empty()) {
        view.free_at[i] = kNever;
      } else if (n.down_count > 0) {
        view.free_at[i] = std::max(n.up_at, now_ms);
      } else if (n.holder == 0 || n.surplus) {
        view.avail[i] = 1;
        ++view.avail_count;
      } else {
        view.free_at[i] =
            std::max(live_.at(n.holder).expected_end_ms, now_ms);
      }
    }
    total_avail += view.avail_count;
  }

  std::optional<Reservation> reservation;
  int reserved_cluster = -1;
  std::vector<char> reserved_mask;
  std::int64_t outside_avail = 0;  // usable nodes of reserved_cluster not reserved

  // Takes `need` nodes on cluster c, first-fit, skipping masked nodes.
  // Idle nodes go first; elastic surplus is reclaimed only for the rest.
  auto take = [&](int c, const PendingJob& job, const std::vector<char>* mask) {
    auto& view = views[static_cast<std::size_t>(c)];
    const auto& state = clusters_[static_cast<std::size_t>(c)];
    Allocation alloc;
    alloc.job_id = job.entry.job_id;
    alloc.cluster_id = state.spec.cluster_id;
    alloc.start_ms = now_ms;
    for (bool reclaiming : {false, true}) {
      for (std::size_t i = 0;
           i < view.avail.size() &&
           static_cast<std::int64_t>(alloc.node_indices.size()) < job.need;
           ++i) {
        if (!view.avail[i] || (mask && (*mask)[i])) continue;
        if ((state.nodes[i].holder != 0) != reclaiming) continue;
        alloc.node_indices.push_back(static_cast<int>(i));
      }
    }
    std::sort(alloc.node_indices.begin(), alloc.node_indices.end());
    for (int i : alloc.node_indices) {
      auto idx = static_cast<std::size_t>(i);
      view.avail[idx] = 0;
      if (c == reserved_cluster && !reserved_mask[idx]) --outside_avail;
      view.free_at[idx] = now_ms + job.walltime_ms;
      const auto& n = state.nodes[idx];
      if (n.holder != 0) {
        auto it = std::find_if(decision.reclaims.begin(), decision.reclaims.end(),
                               [&](const Reclaim& r) { return r.job_id == n.holder; });
        if (it == decision.reclaims.end()) {
          decision.reclaims.push_back({n.holder, state.spec.cluster_id, {}});
          it = decision.reclaims.end() - 1;
        }
        it->node_indices.push_back(i);
      }
    }
    view.avail_count -= job.need;
    total_avail -= job.need;
    decision.starts.push_back(std::move(alloc));
  };

  bool blocked = false;

  for (const auto& [entry, pending] : queue_) {
    // Once the head is blocked, nothing later can start without idle nodes
    // and backfilling; only unsatisfiable advisories would remain.
    if (blocked && (!config_.backfill || total_avail == 0) && unfit_queued_ == 0) break;
    const auto& job = *pending;
    if (!job.fits) {
      decision.unsatisfiable.push_back(entry.job_id);
      continue;
    }
    if (!blocked) {
      bool started = false;
      for (int c : job.clusters) {
        if (views[static_cast<std::size_t>(c)].avail_count >= job.need) {
          take(c, job, nullptr);
          started = true;
          break;
        }
      }
      if (started) continue;
    } else {
      if (!config_.backfill || total_avail == 0) continue;
      for (int c : job.clusters) {
        const auto& view = views[static_cast<std::size_t>(c)];
        if (view.avail_count < job.need) continue;
        // Without a computable reservation there is no start time to
        // protect, so idle nodes may be filled.
        if (!reservation || c != reserved_cluster ||
            now_ms + job.walltime_ms <= reservation->start_ms) {
          take(c, job, nullptr);
          break;
        }
        if (outside_avail >= job.need) {
          take(c, job, &reserved_mask);
          break;
        }
      }
      continue;
    }

    // This entry is the first blocked job: reserve for it.
    blocked = true;
    if (!config_.backfill) continue;
    TimeMs best = kNever;
    int best_cluster = -1;
    for (int c : job.clusters) {
      const auto& view = views[static_cast<std::size_t>(c)];
      if (static_cast<std::int64_t>(view.free_at.size()) < job.need) continue;
      std::vector<TimeMs> times = view.free_at;
      std::nth_element(times.begin(), times.begin() + (job.need - 1),
                       times.end());
      TimeMs t = times[static_cast<std::size_t>(job.need - 1)];
      if (t < best) {
        best = t;
        best_cluster = c;
      }
    }
    if (best_cluster < 0 || best == kNever) continue;
    const auto& view = views[static_cast<std::size_t>(best_cluster)];
    Reservation res;
    res.job_id = entry.job_id;
    res.cluster_id = clusters_[static_cast<std::size_t>(best_cluster)].spec.cluster_id;
    res.start_ms = best;
    res.expected_end_ms = best + job.walltime_ms;
    reserved_mask.assign(view.free_at.size(), 0);
    for (std::size_t i = 0;
         i < view.free_at.size() &&
         static_cast<std::int64_t>(res.node_indices.size()) < job.need;
         ++i) {
      if (view.free_at[i] <= best) {
        res.node_indices.push_back(static_cast<int>(i));
        reserved_mask[i] = 1;
      }
    }
    reservation = std::move(res);
    reserved_cluster = best_cluster;
    outside_avail = 0;
    for (std::size_t i = 0; i < view.avail.size(); ++i) {
      if (view.avail[i] && !reserved_mask[i]) ++outside_avail;
    }
  }
  decision.reservation = std::move(reservation);
  return decision;
}

void Scheduler::apply(const DispatchDecision& decision, TimeMs now_ms) {
  for (const auto& reclaim : decision.reclaims) {
    auto& live = live_.at(reclaim.job_id);
    auto& state = clusters_[static_cast<std::size_t>(index_of(reclaim.cluster_id))];
    auto& nodes = live.allocation.node_indices;
    for (int i : reclaim.node_indices) {
      auto& n = state.nodes[static_cast<std::size_t>(i)];
      n.holder = 0;
      n.surplus = false;
      nodes.erase(std::remove(nodes.begin(), nodes.end(), i), nodes.end());
    }
  }
  for (const auto& alloc : decision.starts) {
    auto it = pending_.find(alloc.job_id);
    if (it == pending_.end()) {
      throw Error(ErrorCode::UnknownJob,
                  "dispatch of unqueued job " + std::to_string(alloc.job_id));
    }
    const auto& job = it->second;
    auto& state = clusters_[static_cast<std::size_t>(index_of(alloc.cluster_id))];
    for (int i : alloc.node_indices) {
      auto& n = state.nodes[static_cast<std::size_t>(i)];
      if (!n.usable()) {
        throw Error(ErrorCode::InvalidInput,
                    "dispatch onto unavailable node " + alloc.cluster_id + "/" +
                        std::to_string(i));
      }
      n.holder = alloc.job_id;
      n.surplus = false;
    }
    LiveAllocation live;
    live.allocation = alloc;
    live.allocation.start_ms = now_ms;
    live.expected_end_ms = now_ms + job.walltime_ms;
    live.elastic = job.elastic;
    live.min_workers = job.min_workers;
    live.max_workers = job.max_workers;
    live.submit_seq = job.entry.submit_seq;
    live.core_nodes = alloc.node_indices;
    queue_.erase(job.entry);
    live_.emplace(alloc.job_id, std::move(live));
    pending_.erase(it);
  }
  for (JobId id : decision.unsatisfiable) dequeue(id);
  last_reservation_ = decision.reservation;
}

std::vector<int> Scheduler::release(JobId job_id) {
  auto it = live_.find(job_id);
  if (it == live_.end()) {
    throw Error(ErrorCode::NoAllocation, std::to_string(job_id));
  }
  const auto& alloc = it->second.allocation;
  auto& state = clusters_[static_cast<std::size_t>(index_of(alloc.cluster_id))];
  for (int i : alloc.node_indices) {
    auto& n = state.nodes[static_cast<std::size_t>(i)];
    n.holder = 0;
    n.surplus = false;
  }
  auto freed = alloc.node_indices;
  live_.erase(it);
  return freed;
}

std::vector<std::int64_t> Scheduler::elastic_targets(int cluster) const {
  // Water-filling: start at min_workers, then repeatedly give one node to the
  // job with the fewest workers (earliest submit_seq on ties) below its max.
  const auto& state = clusters_[static_cast<std::size_t>(cluster)];
  std::vector<const LiveAllocation*> jobs;
  for (const auto& [id, live] : live_) {
    if (live.elastic && live.allocation.cluster_id == state.spec.cluster_id) {
      jobs.push_back(&live);
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](auto* a, auto* b) {
    return std::pair(a->submit_seq, a->allocation.job_id) <
           std::pair(b->submit_seq, b->allocation.job_id);
  });
  std::int64_t pool = state.free_count();
  std::vector<std::int64_t> targets;
  for (auto* job : jobs) {
    pool += static_cast<std::int64_t>(job->allocation.node_indices.size());
    targets.push_back(static_cast<std::int64_t>(job->core_nodes.size()));
  }
  std::int64_t spare = pool - std::accumulate(targets.begin(), targets.end(),
                                              std::int64_t{0});
  while (spare > 0) {
    std::size_t pick = jobs.size();
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (targets[k] >= jobs[k]->max_workers) continue;
      if (pick == jobs.size() || targets[k] < targets[pick]) pick = k;
    }
    if (pick == jobs.size()) break;
    ++targets[pick];
    --spare;
  }
  return targets;
}

std::vector<RescaleChange> Scheduler::plan_rescale() const {
  std::vector<RescaleChange> changes;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    if (clusters_[c].spec.kind != ResourceKind::Cloud) continue;
    std::vector<const LiveAllocation*> jobs;
    for (const auto& [id, live] : live_) {
      if (live.elastic && live.allocation.cluster_id == clusters_[c].spec.cluster_id) {
        jobs.push_back(&live);
      }
    }
    if (jobs.empty()) continue;
    std::sort(jobs.begin(), jobs.end(), [](auto* a, auto* b) {
      return std::pair(a->submit_seq, a->allocation.job_id) <
             std::pair(b->submit_seq, b->allocation.job_id);
    });
    auto targets = elastic_targets(static_cast<int>(c));
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      auto current = static_cast<std::int64_t>(jobs[k]->allocation.node_indices.size());
      if (current != targets[k]) {
        changes.push_back({jobs[k]->allocation.job_id, current, targets[k]});
      }
    }
  }
  return changes;
}

void Scheduler::set_workers(LiveAllocation& live, std::int64_t target) {
  auto& state = clusters_[static_cast<std::size_t>(index_of(live.allocation.cluster_id))];
  auto& nodes = live.allocation.node_indices;
  // Shrink: drop the highest-index surplus nodes.
  while (static_cast<std::int64_t>(nodes.size()) > target) {
    auto victim = std::find_if(nodes.rbegin(), nodes.rend(), [&](int i) {
      return state.nodes[static_cast<std::size_t>(i)].surplus;
    });
    if (victim == nodes.rend()) break;
    auto& n = state.nodes[static_cast<std::size_t>(*victim)];
    n.holder = 0;
    n.surplus = false;
    nodes.erase(std::next(victim).base());
  }
  // Grow: lowest usable indices.
  for (std::size_t i = 0;
       i < state.nodes.size() && static_cast<std::int64_t>(nodes.size()) < target;
       ++i) {
    auto& n = state.nodes[i];
    if (!n.usable()) continue;
    n.holder = live.allocation.job_id;
    n.surplus = true;
    nodes.insert(std::upper_bound(nodes.begin(), nodes.end(), static_cast<int>(i)),
                 static_cast<int>(i));
  }
}

std::int64_t Scheduler::rescale_elastic(JobId job_id, TimeMs /*now_ms*/) {
  auto it = live_.find(job_id);
  if (it == live_.end()) {
    if (pending_.contains(job_id) && !pending_.at(job_id).elastic) {
      throw Error(ErrorCode::NotElastic, std::to_string(job_id));
    }
    throw Error(ErrorCode::NotRunning, std::to_string(job_id));
  }
  auto& live = it->second;
  if (!live.elastic) throw Error(ErrorCode::NotElastic, std::to_string(job_id));
  for (const auto& change : plan_rescale()) {
    if (change.job_id == job_id) set_workers(live, change.to_workers);
  }
  return static_cast<std::int64_t>(live.allocation.node_indices.size());
}

std::vector<RescaleChange> Scheduler::rebalance_elastic(TimeMs /*now_ms*/) {
  auto changes = plan_rescale();
  for (const auto& ch : changes) {
    if (ch.to_workers < ch.from_workers) set_workers(live_.at(ch.job_id), ch.to_workers);
  }
  for (const auto& ch : changes) {
    if (ch.to_workers > ch.from_workers) set_workers(live_.at(ch.job_id), ch.to_workers);
  }
  return changes;
}

std::optional<Scheduler::NodeLoss> Scheduler::mark_down(
    const std::string& cluster_id, int node, TimeMs up_at) {
  if (!has_node(cluster_id, node)) {
    throw Error(ErrorCode::UnknownNode, cluster_id + "/" + std::to_string(node));
  }
  auto& state = clusters_[static_cast<std::size_t>(index_of(cluster_id))];
  auto& n = state.nodes[static_cast<std::size_t>(node)];
  n.down_count += 1;
  n.up_at = std::max(n.up_at, up_at);
  if (n.holder == 0) return std::nullopt;
  NodeLoss loss{n.holder, n.surplus};
  if (n.surplus) {
    auto& nodes = live_.at(n.holder).allocation.node_indices;
    nodes.erase(std::remove(nodes.begin(), nodes.end(), node), nodes.end());
    n.holder = 0;
    n.surplus = false;
  }
  return loss;
}

void Scheduler::mark_up(const std::string& cluster_id, int node) {
  if (!has_node(cluster_id, node)) {
    throw Error(ErrorCode::UnknownNode, cluster_id + "/" + std::to_string(node));
  }
  auto& n = clusters_[static_cast<std::size_t>(index_of(cluster_id))]
                .nodes[static_cast<std::size_t>(node)];
  if (n.down_count > 0) n.down_count -= 1;
}

std::vector<int> Scheduler::carve(const std::string& cluster_id,
                                  std::int64_t count,
                                  const std::string& vcluster_id) {
  int idx = index_of(cluster_id);
  if (idx < 0) throw Error(ErrorCode::UnknownNode, "cluster " + cluster_id);
  auto& state = clusters_[static_cast<std::size_t>(idx)];
  std::vector<int> picked;
  for (std::size_t i = 0;
       i < state.nodes.size() && static_cast<std::int64_t>(picked.size()) < count;
       ++i) {
    if (state.nodes[i].usable()) picked.push_back(static_cast<int>(i));
  }
  if (static_cast<std::int64_t>(picked.size()) < count) {
    throw Error(ErrorCode::InsufficientCloudCapacity,
                "requested " + std::to_string(count) + ", usable " +
                    std::to_string(picked.size()));
  }
  for (int i : picked) state.nodes[static_cast<std::size_t>(i)].vcluster = vcluster_id;
  return picked;
}

std::vector<int> Scheduler::uncarve(const std::string& cluster_id,
                                    const std::string& vcluster_id) {
  int idx = index_of(cluster_id);
  if (idx < 0) throw Error(ErrorCode::UnknownNode, "cluster " + cluster_id);
  std::vector<int> freed;
  auto& nodes = clusters_[static_cast<std::size_t>(idx)].nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].vcluster == vcluster_id) {
      nodes[i].vcluster.clear();
      freed.push_back(static_cast<int>(i));
    }
  }
  return freed;
}

}  // namespace hybridsched
