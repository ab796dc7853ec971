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

#include "fixtures.hpp"
#include "hybridsched/simulator.hpp"
#include "hybridsched/tracegen.hpp"
#include "oracles.hpp"

namespace hybridsched {
namespace {

using fixtures::cluster;
using fixtures::rigid;

constexpr auto kGpu = ResourceKind::Gpu;

// Compact "t kind job" rendering for timeline comparisons.
std::vector<std::string> timeline(const EventLog& log) {
  std::vector<std::string> out;
  for (const auto& e : log) {
    std::string line = std::to_string(e.t_ms) + " " + std::string(to_string(e.kind));
    if (e.job_id) line += " " + std::to_string(*e.job_id);
    if (e.node_index) line += " n" + std::to_string(*e.node_index);
    if (e.nodes) {
      line += " [";
      for (std::size_t i = 0; i < e.nodes->size(); ++i) {
        line += (i ? "," : "") + std::to_string((*e.nodes)[i]);
      }
      line += "]";
    }
    out.push_back(line);
  }
  return out;
}

std::vector<ClusterSpec> gpu4() { return {cluster("gpu", kGpu, 4, 10)}; }

SubmissionTrace one_job() {
  SubmissionTrace t;
  t.jobs.push_back({0, rigid(2, {kGpu}, 100, 20000)});
  return t;
}

TEST(Simulator, EmptyTrace) {
  auto r = run_trace({}, gpu4(), {});
  EXPECT_TRUE(r.log.empty());
  EXPECT_TRUE(r.jobs.empty());
}

TEST(Simulator, SingleJobRunsForDuration) {
  auto r = run_trace(one_job(), gpu4(), {});
  EXPECT_EQ(timeline(r.log), (std::vector<std::string>{
                                 "0 JobSubmitted 1", "0 JobQueued 1",
                                 "0 JobStarted 1 [0,1]", "5000 JobFinished 1"}));
  EXPECT_EQ(r.jobs.at(1).state, JobState::Completed);
  EXPECT_EQ(*r.jobs.at(1).end_ms, 1000 * 100 / (10 * 2));
}

TEST(Simulator, DeterministicLogs) {
  auto trace = generate_trace(gpu4(), {.jobs = 50}, 42);
  auto a = run_trace(trace, gpu4(), {});
  auto b = run_trace(trace, gpu4(), {});
  EXPECT_EQ(to_canonical_jsonl(a.log), to_canonical_jsonl(b.log));
}

TEST(Simulator, StepBeforeFirstEvent) {
  SubmissionTrace t;
  t.jobs.push_back({100, rigid(1, {kGpu}, 10, 20000)});
  Simulator sim(gpu4(), {});
  sim.load(t);
  EXPECT_TRUE(sim.step(50).empty());
  EXPECT_EQ(sim.now(), 50);
  sim.step(20);
  EXPECT_EQ(sim.now(), 50);
}

TEST(Simulator, StepAcrossFinish) {
  Simulator sim(gpu4(), {});
  sim.load(one_job());
  sim.step(4999);
  EXPECT_EQ(sim.scheduler().cluster("gpu").busy_count(), 2);
  auto got = sim.step(5000);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].kind, EventKind::JobFinished);
  EXPECT_EQ(sim.scheduler().cluster("gpu").busy_count(), 0);
}

TEST(Simulator, ChunkedSteppingMatchesSingleShot) {
  auto clusters = std::vector<ClusterSpec>{cluster("gpu", kGpu, 4, 10),
                                           cluster("cloud", ResourceKind::Cloud, 4, 5)};
  auto trace = generate_trace(clusters, {.jobs = 40, .elastic_permille = 300, .faults = 3}, 9);
  Simulator whole(clusters, {});
  whole.load(trace);
  whole.run();
  Simulator chunked(clusters, {});
  chunked.load(trace);
  while (!chunked.idle()) chunked.step(chunked.now() + 5);
  EXPECT_EQ(to_canonical_jsonl(chunked.log()), to_canonical_jsonl(whole.log()));
}

SubmissionTrace failing_job() {
  SubmissionTrace t;
  t.jobs.push_back({0, rigid(2, {kGpu}, 100, 20000)});
  t.faults.push_back({2000, "gpu", 0, 1000});
  return t;
}

TEST(Failure, RetryRestartsOnce) {
  SimConfig cfg;
  cfg.retry_budget = 1;
  auto r = run_trace(failing_job(), gpu4(), cfg);
  EXPECT_EQ(timeline(r.log), (std::vector<std::string>{
                                 "0 JobSubmitted 1", "0 JobQueued 1", "0 JobStarted 1 [0,1]",
                                 "2000 NodeDown n0", "2000 JobQueued 1",
                                 "2000 JobStarted 1 [1,2]", "3000 NodeUp n0",
                                 "7000 JobFinished 1"}));
  EXPECT_EQ(r.jobs.at(1).retries_used, 1);
}

TEST(Failure, NoBudgetFails) {
  SimConfig cfg;
  cfg.retry_budget = 0;
  auto r = run_trace(failing_job(), gpu4(), cfg);
  EXPECT_EQ(timeline(r.log), (std::vector<std::string>{
                                 "0 JobSubmitted 1", "0 JobQueued 1", "0 JobStarted 1 [0,1]",
                                 "2000 NodeDown n0", "2000 JobFailed 1", "3000 NodeUp n0"}));
  EXPECT_EQ(r.jobs.at(1).state, JobState::Failed);
}

TEST(Failure, IdleNodeOnlyReducesCapacity) {
  Simulator sim(gpu4(), {});
  sim.inject_node_failure("gpu", 3, 10, 100);
  sim.step(50);
  EXPECT_EQ(sim.scheduler().cluster("gpu").down_count(), 1);
  sim.run();
  EXPECT_EQ(timeline(sim.log()), (std::vector<std::string>{"10 NodeDown n3", "110 NodeUp n3"}));
}

TEST(Failure, InjectionErrors) {
  Simulator sim(gpu4(), {});
  sim.step(100);
  auto code = [&](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidInput;
  };
  EXPECT_EQ(code([&] { sim.inject_node_failure("gpu", 4, 200, 1); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code([&] { sim.inject_node_failure("nope", 0, 200, 1); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code([&] { sim.inject_node_failure("gpu", 0, 50, 1); }), ErrorCode::PastTime);
}

TEST(Cancel, QueuedRunningAndTerminal) {
  Simulator sim({cluster("gpu", kGpu, 2, 10)}, {});
  SubmissionTrace t;
  t.jobs.push_back({0, rigid(2, {kGpu}, 100, 20000)});
  t.jobs.push_back({0, rigid(2, {kGpu}, 100, 20000)});
  t.jobs.push_back({0, rigid(1, {kGpu}, 1, 20000)});
  sim.load(t);
  sim.step(0);
  EXPECT_EQ(sim.job(2).state, JobState::Queued);
  auto queued = sim.scheduler().queue_size();
  EXPECT_EQ(sim.cancel(2), JobState::Cancelled);
  EXPECT_EQ(sim.scheduler().queue_size(), queued - 1);
  EXPECT_EQ(sim.cancel(1), JobState::Cancelled);
  EXPECT_EQ(sim.scheduler().live_allocation(1), nullptr);
  sim.run();
  EXPECT_EQ(sim.job(3).state, JobState::Completed);
  try {
    sim.cancel(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadyTerminal);
  }
  EXPECT_THROW(sim.cancel(99), Error);
}

TEST(Walltime, TimesOutAtLimit) {
  SubmissionTrace t;
  t.jobs.push_back({0, rigid(2, {kGpu}, 100, 3000)});  // needs 5000
  auto r = run_trace(t, gpu4(), {});
  EXPECT_EQ(timeline(r.log).back(), "3000 JobTimedOut 1");
  EXPECT_EQ(r.jobs.at(1).state, JobState::TimedOut);
}

TEST(Walltime, NeverFinishesLate) {
  auto clusters = std::vector<ClusterSpec>{cluster("gpu", kGpu, 4, 10),
                                           cluster("cpu", ResourceKind::Cpu, 6, 3)};
  auto trace = generate_trace(clusters, {.jobs = 200, .short_walltime_permille = 200}, 3);
  auto r = run_trace(trace, clusters, {});
  std::map<JobId, TimeMs> started;
  for (const auto& e : r.log) {
    if (e.kind == EventKind::JobStarted) started[*e.job_id] = e.t_ms;
    if (e.kind == EventKind::JobFinished || e.kind == EventKind::JobTimedOut) {
      auto limit = started[*e.job_id] + r.jobs.at(*e.job_id).spec.walltime_limit_ms;
      if (e.kind == EventKind::JobFinished) {
        EXPECT_LE(e.t_ms, limit);
      } else {
        EXPECT_EQ(e.t_ms, limit);
      }
    }
  }
  EXPECT_TRUE(oracle::replay_violations(r.log, clusters, fixtures::specs_of(trace)).empty());
}

TEST(Trace, JsonRoundTripAndValidation) {
  auto t = failing_job();
  t.rng_seed = 42;
  auto j = to_json(t);
  EXPECT_EQ(to_json(parse_trace(j)), j);

  Simulator sim(gpu4(), {});
  auto bad = t;
  bad.jobs[0].spec.shape = RigidShape{9};
  try {
    sim.load(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
}

TEST(Horizon, StalledRunThrows) {
  SimConfig cfg;
  cfg.horizon_ms = 1000;
  SubmissionTrace t;
  t.jobs.push_back({0, rigid(1, {kGpu}, 1000, 1'000'000)});
  try {
    run_trace(t, gpu4(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonTerminating);
  }
}

}  // namespace
}  // namespace hybridsched
