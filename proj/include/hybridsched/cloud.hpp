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

// Front layer: user accounts and quotas, admission, routing between the
// cloud and HPC layers, and virtual clusters carved out of the cloud pool.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridsched/domain.hpp"
#include "hybridsched/scheduler.hpp"

namespace hybridsched {

struct Quota {
  std::int64_t max_concurrent_jobs = 64;
  std::int64_t max_nodes_in_use = 4096;
  std::int64_t max_vcluster_nodes = 64;

  bool operator==(const Quota&) const = default;
};

struct UserAccount {
  std::string user_id;
  std::string display_name;
  Quota quota;
  TimeMs created_at_ms = 0;
};

enum class VClusterState { Provisioning, Ready, Released };
std::string_view to_string(VClusterState state);

struct VirtualCluster {
  std::string vcluster_id;
  std::string owner;
  std::string cluster_id;
  std::vector<int> node_indices;
  std::string image;
  VClusterState state = VClusterState::Provisioning;
  TimeMs created_at_ms = 0;
  TimeMs ready_at_ms = 0;
  std::optional<TimeMs> released_at_ms;
};

/// What a user currently has in flight, counted by the caller from live job
/// records. nodes_in_use counts rigid node_count and elastic max_workers of
/// every non-terminal job, which bounds what those jobs can ever hold.
struct UserUsage {
  std::int64_t concurrent_jobs = 0;
  std::int64_t nodes_in_use = 0;
};

struct Admission {
  bool accepted = true;
  std::optional<ErrorCode> reason;  // ConcurrencyQuota or NodeQuota
  std::string detail;
};

/// Elastic jobs go to the cloud layer. Rigid jobs go to the HPC layer; a rigid
/// job whose only preference is cloud is unroutable unless
/// hybrid_rigid_on_cloud is set.
Layer route(const JobSpec& spec, bool hybrid_rigid_on_cloud);

class CloudLayer {
 public:
  explicit CloudLayer(TimeMs provision_delay_ms = 0)
      : provision_delay_ms_(provision_delay_ms) {}

  const UserAccount& create_user(const std::string& user_id, Quota quota,
                                 std::string display_name = {},
                                 TimeMs now_ms = 0);
  const UserAccount& user(const std::string& user_id) const;
  bool has_user(const std::string& user_id) const {
    return users_.contains(user_id);
  }
  const std::map<std::string, UserAccount>& users() const { return users_; }

  Admission admit(const JobSpec& spec, const UserUsage& usage) const;

  const VirtualCluster& provision_vcluster(Scheduler& scheduler,
                                           const std::string& user_id,
                                           std::int64_t node_count,
                                           const std::string& image,
                                           TimeMs now_ms);
  std::vector<int> release_vcluster(Scheduler& scheduler,
                                    const std::string& vcluster_id,
                                    TimeMs now_ms);
  /// Promotes Provisioning clusters whose ready time has passed.
  void refresh(TimeMs now_ms);

  const VirtualCluster& vcluster(const std::string& vcluster_id) const;
  const std::map<std::string, VirtualCluster>& vclusters() const {
    return vclusters_;
  }
  std::int64_t live_vcluster_nodes(const std::string& user_id) const;

 private:
  TimeMs provision_delay_ms_;
  std::map<std::string, UserAccount> users_;
  std::map<std::string, VirtualCluster> vclusters_;
  std::int64_t next_vcluster_ = 1;
};

/// Cloud-pool partition invariant: on every cloud cluster each node is
/// exactly one of free, batch-allocated or vcluster-held (down nodes count as
/// free capacity that is temporarily unusable). Returns an empty string when
/// it holds, else a description of the first violation.
std::string check_cloud_partition(const Scheduler& scheduler,
                                  const CloudLayer& cloud);

nlohmann::json to_json(const UserAccount& account);
nlohmann::json to_json(const VirtualCluster& vcluster);

}  // namespace hybridsched
