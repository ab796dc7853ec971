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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "hybridsched/cloud.hpp"

namespace hybridsched {
namespace {

using fixtures::cluster;
using fixtures::elastic;
using fixtures::rigid;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidInput;
}

TEST(Users, CreateAndDuplicates) {
  CloudLayer cloud;
  cloud.create_user("alice", {});
  EXPECT_EQ(cloud.user("alice").user_id, "alice");
  EXPECT_EQ(code_of([&] { cloud.create_user("alice", {}); }), ErrorCode::DuplicateUser);
  EXPECT_EQ(code_of([&] { cloud.user("bob"); }), ErrorCode::UnknownUser);
  for (int i = 0; i < 100; ++i) cloud.create_user("u" + std::to_string(i), {});
  EXPECT_EQ(cloud.users().size(), 101u);
}

TEST(Admit, QuotaExamples) {
  CloudLayer cloud;
  Quota q;
  q.max_concurrent_jobs = 1;
  cloud.create_user("alice", q);
  auto job = rigid(2, {ResourceKind::Cpu}, 1, 1);
  EXPECT_TRUE(cloud.admit(job, {0, 0}).accepted);
  auto second = cloud.admit(job, {1, 2});
  EXPECT_FALSE(second.accepted);
  EXPECT_EQ(second.reason, ErrorCode::ConcurrencyQuota);

  Quota nodes;
  nodes.max_nodes_in_use = 4;
  cloud.create_user("bob", nodes);
  job.user_id = "bob";
  auto v = cloud.admit(job, {1, 3});
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.reason, ErrorCode::NodeQuota);
  EXPECT_TRUE(cloud.admit(job, {1, 2}).accepted);

  job.user_id = "carol";
  EXPECT_EQ(code_of([&] { cloud.admit(job, {}); }), ErrorCode::UnknownUser);
}

TEST(Route, ShapeAndFlag) {
  EXPECT_EQ(route(elastic(1, 8, 1, 1), false), Layer::Cloud);
  EXPECT_EQ(route(rigid(2, {ResourceKind::Gpu, ResourceKind::Cpu}, 1, 1), false), Layer::Hpc);
  auto cloud_only = rigid(1, {ResourceKind::Cloud}, 1, 1);
  EXPECT_EQ(code_of([&] { route(cloud_only, false); }), ErrorCode::UnroutableKind);
  EXPECT_EQ(route(cloud_only, true), Layer::Hpc);
}

TEST(VCluster, FirstFitReuseAndErrors) {
  Scheduler s({cluster("cloud", ResourceKind::Cloud, 4, 1)}, {});
  CloudLayer cloud;
  cloud.create_user("alice", {});
  auto a = cloud.provision_vcluster(s, "alice", 2, "spark", 0);
  EXPECT_EQ(a.node_indices, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.state, VClusterState::Ready);
  EXPECT_EQ(s.cluster("cloud").free_count(), 2);
  auto b = cloud.provision_vcluster(s, "alice", 2, "spark", 0);
  EXPECT_EQ(b.node_indices, (std::vector<int>{2, 3}));
  EXPECT_EQ(cloud.release_vcluster(s, a.vcluster_id, 5), (std::vector<int>{0, 1}));
  auto c = cloud.provision_vcluster(s, "alice", 1, "mapreduce", 6);
  EXPECT_EQ(c.node_indices, (std::vector<int>{0}));
  EXPECT_EQ(check_cloud_partition(s, cloud), "");

  EXPECT_EQ(code_of([&] { cloud.provision_vcluster(s, "alice", 8, "x", 7); }),
            ErrorCode::InsufficientCloudCapacity);
  EXPECT_EQ(code_of([&] { cloud.provision_vcluster(s, "nobody", 1, "x", 7); }),
            ErrorCode::UnknownUser);
  EXPECT_EQ(code_of([&] { cloud.release_vcluster(s, "vc-404", 7); }),
            ErrorCode::UnknownVCluster);
  EXPECT_EQ(code_of([&] { cloud.release_vcluster(s, a.vcluster_id, 7); }),
            ErrorCode::AlreadyReleased);
}

TEST(VCluster, QuotaExceeded) {
  Scheduler s({cluster("cloud", ResourceKind::Cloud, 8, 1)}, {});
  CloudLayer cloud;
  Quota q;
  q.max_vcluster_nodes = 3;
  cloud.create_user("alice", q);
  cloud.provision_vcluster(s, "alice", 2, "x", 0);
  EXPECT_EQ(code_of([&] { cloud.provision_vcluster(s, "alice", 2, "x", 0); }),
            ErrorCode::QuotaExceeded);
  EXPECT_EQ(cloud.live_vcluster_nodes("alice"), 2);
}

TEST(VCluster, ProvisionDelay) {
  Scheduler s({cluster("cloud", ResourceKind::Cloud, 2, 1)}, {});
  CloudLayer cloud(500);
  cloud.create_user("alice", {});
  auto id = cloud.provision_vcluster(s, "alice", 1, "x", 100).vcluster_id;
  EXPECT_EQ(cloud.vcluster(id).state, VClusterState::Provisioning);
  cloud.refresh(599);
  EXPECT_EQ(cloud.vcluster(id).state, VClusterState::Provisioning);
  cloud.refresh(600);
  EXPECT_EQ(cloud.vcluster(id).state, VClusterState::Ready);
}

// Random provision/release/dispatch/release sequences keep the pool
// partitioned; free nodes are recounted from an independent free set.
TEST(VCluster, PartitionInvariantUnderRandomOps) {
  std::mt19937_64 rng(17);
  SchedulerConfig cfg;
  cfg.hybrid_rigid_on_cloud = true;
  Scheduler s({cluster("cloud", ResourceKind::Cloud, 8, 1)}, cfg);
  CloudLayer cloud;
  cloud.create_user("alice", {});
  std::set<int> free = {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<std::string> live_vc;
  std::vector<JobId> live_jobs;
  JobId next = 1;
  for (int i = 0; i < 500; ++i) {
    switch (rng() % 4) {
      case 0: {
        auto n = static_cast<std::int64_t>(rng() % 3) + 1;
        try {
          auto vc = cloud.provision_vcluster(s, "alice", n, "x", i);
          std::vector<int> want(free.begin(), std::next(free.begin(), n));
          EXPECT_EQ(vc.node_indices, want);
          for (int k : want) free.erase(k);
          live_vc.push_back(vc.vcluster_id);
        } catch (const Error&) {
          EXPECT_LT(static_cast<std::int64_t>(free.size()), n);
        }
        break;
      }
      case 1:
        if (!live_vc.empty()) {
          auto id = live_vc.back();
          live_vc.pop_back();
          for (int k : cloud.release_vcluster(s, id, i)) free.insert(k);
        }
        break;
      case 2: {
        auto spec = rigid(1, {ResourceKind::Cloud}, 1, 100);
        s.enqueue(next, spec, i);
        auto d = s.plan(i);
        s.apply(d, i);
        if (!d.starts.empty()) {
          free.erase(d.starts[0].node_indices[0]);
          live_jobs.push_back(next);
        } else {
          s.dequeue(next);
        }
        ++next;
        break;
      }
      default:
        if (!live_jobs.empty()) {
          for (int k : s.release(live_jobs.back())) free.insert(k);
          live_jobs.pop_back();
        }
    }
    ASSERT_EQ(check_cloud_partition(s, cloud), "") << "op " << i;
    ASSERT_EQ(s.cluster("cloud").free_count(), static_cast<std::int64_t>(free.size()));
  }
}

}  // namespace
}  // namespace hybridsched
