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

#include "hybridsched/cloud.hpp"

#include <algorithm>

namespace hybridsched {

std::string_view to_string(VClusterState state) {
  switch (state) {
    case VClusterState::Provisioning: return "Provisioning";
    case VClusterState::Ready: return "Ready";
    case VClusterState::Released: return "Released";
  }
  return "?";
}

Layer route(const JobSpec& spec, bool hybrid_rigid_on_cloud) {
  if (is_elastic(spec.shape)) return Layer::Cloud;
  bool has_hpc_kind = std::any_of(
      spec.kind_preferences.begin(), spec.kind_preferences.end(),
      [](ResourceKind k) { return k != ResourceKind::Cloud; });
  if (!has_hpc_kind && !hybrid_rigid_on_cloud) {
    throw Error(ErrorCode::UnroutableKind,
                "rigid job '" + spec.name + "' only accepts cloud");
  }
  return Layer::Hpc;
}

const UserAccount& CloudLayer::create_user(const std::string& user_id,
                                           Quota quota,
                                           std::string display_name,
                                           TimeMs now_ms) {
  if (user_id.empty()) throw Error(ErrorCode::InvalidInput, "empty user_id");
  if (quota.max_concurrent_jobs < 0 || quota.max_nodes_in_use < 0 ||
      quota.max_vcluster_nodes < 0) {
    throw Error(ErrorCode::InvalidInput, "quota fields must be >= 0");
  }
  if (users_.contains(user_id)) throw Error(ErrorCode::DuplicateUser, user_id);
  UserAccount account{user_id,
                      display_name.empty() ? user_id : std::move(display_name),
                      quota, now_ms};
  return users_.emplace(user_id, std::move(account)).first->second;
}

const UserAccount& CloudLayer::user(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw Error(ErrorCode::UnknownUser, user_id);
  return it->second;
}

Admission CloudLayer::admit(const JobSpec& spec, const UserUsage& usage) const {
  const auto& quota = user(spec.user_id).quota;
  if (usage.concurrent_jobs + 1 > quota.max_concurrent_jobs) {
    return {false, ErrorCode::ConcurrencyQuota,
            std::to_string(usage.concurrent_jobs) + " of " +
                std::to_string(quota.max_concurrent_jobs) + " jobs in flight"};
  }
  auto projected = usage.nodes_in_use + peak_nodes(spec.shape);
  if (projected > quota.max_nodes_in_use) {
    return {false, ErrorCode::NodeQuota,
            "projected " + std::to_string(projected) + " nodes exceeds " +
                std::to_string(quota.max_nodes_in_use)};
  }
  return {};
}

std::int64_t CloudLayer::live_vcluster_nodes(const std::string& user_id) const {
  std::int64_t total = 0;
  for (const auto& [id, vc] : vclusters_) {
    if (vc.owner == user_id && vc.state != VClusterState::Released) {
      total += static_cast<std::int64_t>(vc.node_indices.size());
    }
  }
  return total;
}

const VirtualCluster& CloudLayer::provision_vcluster(Scheduler& scheduler,
                                                     const std::string& user_id,
                                                     std::int64_t node_count,
                                                     const std::string& image,
                                                     TimeMs now_ms) {
  const auto& account = user(user_id);
  if (node_count < 1) throw Error(ErrorCode::NonPositive, "node_count");
  if (live_vcluster_nodes(user_id) + node_count >
      account.quota.max_vcluster_nodes) {
    throw Error(ErrorCode::QuotaExceeded,
                "max_vcluster_nodes " +
                    std::to_string(account.quota.max_vcluster_nodes));
  }
  const ClusterState* target = nullptr;
  for (const auto& c : scheduler.clusters()) {
    if (c.spec.kind == ResourceKind::Cloud && c.free_count() >= node_count) {
      target = &c;
      break;
    }
  }
  if (target == nullptr) {
    throw Error(ErrorCode::InsufficientCloudCapacity,
                "no cloud cluster has " + std::to_string(node_count) +
                    " free nodes");
  }
  VirtualCluster vc;
  vc.vcluster_id = "vc-" + std::to_string(next_vcluster_++);
  vc.owner = user_id;
  vc.cluster_id = target->spec.cluster_id;
  vc.image = image;
  vc.node_indices = scheduler.carve(vc.cluster_id, node_count, vc.vcluster_id);
  vc.created_at_ms = now_ms;
  vc.ready_at_ms = now_ms + provision_delay_ms_;
  vc.state = provision_delay_ms_ == 0 ? VClusterState::Ready
                                      : VClusterState::Provisioning;
  auto id = vc.vcluster_id;
  return vclusters_.emplace(id, std::move(vc)).first->second;
}

std::vector<int> CloudLayer::release_vcluster(Scheduler& scheduler,
                                              const std::string& vcluster_id,
                                              TimeMs now_ms) {
  auto it = vclusters_.find(vcluster_id);
  if (it == vclusters_.end()) {
    throw Error(ErrorCode::UnknownVCluster, vcluster_id);
  }
  auto& vc = it->second;
  if (vc.state == VClusterState::Released) {
    throw Error(ErrorCode::AlreadyReleased, vcluster_id);
  }
  auto freed = scheduler.uncarve(vc.cluster_id, vc.vcluster_id);
  vc.state = VClusterState::Released;
  vc.released_at_ms = now_ms;
  return freed;
}

void CloudLayer::refresh(TimeMs now_ms) {
  for (auto& [id, vc] : vclusters_) {
    if (vc.state == VClusterState::Provisioning && now_ms >= vc.ready_at_ms) {
      vc.state = VClusterState::Ready;
    }
  }
}

const VirtualCluster& CloudLayer::vcluster(const std::string& vcluster_id) const {
  auto it = vclusters_.find(vcluster_id);
  if (it == vclusters_.end()) {
    throw Error(ErrorCode::UnknownVCluster, vcluster_id);
  }
  return it->second;
}

std::string check_cloud_partition(const Scheduler& scheduler,
                                  const CloudLayer& cloud) {
  for (const auto& c : scheduler.clusters()) {
    if (c.spec.kind != ResourceKind::Cloud) continue;
    std::vector<int> owners(c.nodes.size(), 0);
    for (const auto& [id, vc] : cloud.vclusters()) {
      if (vc.cluster_id != c.spec.cluster_id ||
          vc.state == VClusterState::Released) {
        continue;
      }
      for (int i : vc.node_indices) {
        auto& o = owners[static_cast<std::size_t>(i)];
        if (o != 0) return c.spec.cluster_id + ": node in two vclusters";
        o = 1;
        if (c.nodes[static_cast<std::size_t>(i)].vcluster != vc.vcluster_id) {
          return c.spec.cluster_id + ": vcluster bookkeeping mismatch";
        }
      }
    }
    std::int64_t free = 0, batch = 0, held = 0;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
      const auto& n = c.nodes[i];
      bool in_vc = !n.vcluster.empty();
      if (in_vc != (owners[i] == 1)) {
        return c.spec.cluster_id + ": orphan vcluster node " + std::to_string(i);
      }
      if (in_vc && n.holder != 0) {
        return c.spec.cluster_id + ": node " + std::to_string(i) +
               " both batch-allocated and vcluster-held";
      }
      if (in_vc) ++held;
      else if (n.holder != 0) ++batch;
      else ++free;
    }
    if (free + batch + held != c.spec.node_count) {
      return c.spec.cluster_id + ": partition does not cover the pool";
    }
  }
  return {};
}

nlohmann::json to_json(const UserAccount& account) {
  return {{"user_id", account.user_id},
          {"display_name", account.display_name},
          {"created_at_ms", account.created_at_ms},
          {"quota",
           {{"max_concurrent_jobs", account.quota.max_concurrent_jobs},
            {"max_nodes_in_use", account.quota.max_nodes_in_use},
            {"max_vcluster_nodes", account.quota.max_vcluster_nodes}}}};
}

nlohmann::json to_json(const VirtualCluster& vc) {
  return {{"vcluster_id", vc.vcluster_id},
          {"owner", vc.owner},
          {"cluster_id", vc.cluster_id},
          {"node_indices", vc.node_indices},
          {"image", vc.image},
          {"state", to_string(vc.state)},
          {"created_at_ms", vc.created_at_ms},
          {"ready_at_ms", vc.ready_at_ms},
          {"released_at_ms",
           vc.released_at_ms ? nlohmann::json(*vc.released_at_ms) : nlohmann::json(nullptr)}};
}

}  // namespace hybridsched
